//! Series, parallel and nested index-family structures.
//!
//! A nested structure is described by an outermost index set `J` and one
//! family of index sets per deeper level (`A(j)`, `L(a)`, `s(l)`). Levels
//! alternate between series and parallel, starting from the outer shape.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expr::{BlockId, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Series,
    Parallel,
}

impl Shape {
    pub fn flip(self) -> Shape {
        match self {
            Shape::Series => Shape::Parallel,
            Shape::Parallel => Shape::Series,
        }
    }
}

pub type IndexSet = BTreeSet<BlockId>;
pub type Family = BTreeMap<BlockId, IndexSet>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedIndex {
    outer: Shape,
    top: IndexSet,
    families: Vec<Family>,
}

const LEVEL_NAMES: [&str; 4] = ["J", "A", "L", "s"];

fn level_name(depth: usize, level: usize) -> &'static str {
    // the innermost family is always called `s`
    if level + 1 == depth && level > 0 {
        "s"
    } else {
        LEVEL_NAMES[level]
    }
}

impl NestedIndex {
    /// Builds and validates a hierarchy of depth `1 + families.len()`,
    /// which must be 1, 2 or 4.
    pub fn new(outer: Shape, top: IndexSet, families: Vec<Family>) -> Result<Self> {
        let idx = NestedIndex { outer, top, families };
        idx.validate()?;
        Ok(idx)
    }

    /// Plain series or parallel structure over `ids`.
    pub fn flat<I, S>(shape: Shape, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<BlockId>,
    {
        Self::new(shape, ids.into_iter().map(Into::into).collect(), Vec::new())
    }

    /// Series-parallel (`outer = Series`) or parallel-series structure.
    pub fn two_level(outer: Shape, top: IndexSet, inner: Family) -> Result<Self> {
        Self::new(outer, top, vec![inner])
    }

    /// Four alternating levels `J`, `A`, `L`, `s`.
    pub fn four_level(outer: Shape, top: IndexSet, a: Family, l: Family, s: Family) -> Result<Self> {
        Self::new(outer, top, vec![a, l, s])
    }

    pub fn depth(&self) -> usize {
        1 + self.families.len()
    }

    pub fn outer(&self) -> Shape {
        self.outer
    }

    fn validate(&self) -> Result<()> {
        let depth = self.depth();
        if ![1, 2, 4].contains(&depth) {
            return Err(Error::structure(format!(
                "nesting depth must be 1, 2 or 4, got {depth}"
            )));
        }
        if self.top.is_empty() {
            return Err(Error::structure("index set J is empty"));
        }
        // owner of each leaf index, to report overlapping leaf sets
        let mut owner: BTreeMap<&str, String> = BTreeMap::new();
        self.walk_sets(&mut |level, key, set| {
            let name = match key {
                None => "J".to_string(),
                Some(k) => format!("{}({k})", level_name(depth, level)),
            };
            if set.is_empty() {
                return Err(Error::structure(format!("index set {name} is empty")));
            }
            if level + 1 == depth {
                for id in set {
                    if let Some(prev) = owner.insert(id, name.clone()) {
                        return Err(Error::structure(format!(
                            "index sets {prev} and {name} are not disjoint: both contain `{id}`"
                        )));
                    }
                }
            }
            Ok(())
        })
    }

    /// Visits every index set top-down; `key` is the parent index.
    fn walk_sets<'a>(
        &'a self,
        f: &mut dyn FnMut(usize, Option<&'a str>, &'a IndexSet) -> Result<()>,
    ) -> Result<()> {
        fn go<'a>(
            idx: &'a NestedIndex,
            level: usize,
            key: Option<&'a str>,
            set: &'a IndexSet,
            f: &mut dyn FnMut(usize, Option<&'a str>, &'a IndexSet) -> Result<()>,
        ) -> Result<()> {
            f(level, key, set)?;
            if let Some(family) = idx.families.get(level) {
                for id in set {
                    let child = family.get(id).ok_or_else(|| {
                        Error::structure(format!(
                            "index set {}({id}) is not defined",
                            level_name(idx.depth(), level + 1)
                        ))
                    })?;
                    go(idx, level + 1, Some(id), child, f)?;
                }
            }
            Ok(())
        }
        go(self, 0, None, &self.top, f)
    }

    /// Leaf indices in canonical (depth-first, sorted) order.
    pub fn leaves(&self) -> Vec<&str> {
        let depth = self.depth();
        let mut out = Vec::new();
        let _ = self.walk_sets(&mut |level, _, set| {
            if level + 1 == depth {
                out.extend(set.iter().map(String::as_str));
            }
            Ok(())
        });
        out
    }

    /// Folds the hierarchy bottom-up: `leaf` maps a leaf index, `combine`
    /// merges the children of one set under the given shape.
    pub fn fold<T>(
        &self,
        leaf: &mut dyn FnMut(&str) -> Result<T>,
        combine: &mut dyn FnMut(Shape, Vec<T>) -> Result<T>,
    ) -> Result<T> {
        fn go<T>(
            idx: &NestedIndex,
            level: usize,
            shape: Shape,
            set: &IndexSet,
            leaf: &mut dyn FnMut(&str) -> Result<T>,
            combine: &mut dyn FnMut(Shape, Vec<T>) -> Result<T>,
        ) -> Result<T> {
            let mut parts = Vec::with_capacity(set.len());
            for id in set {
                parts.push(match idx.families.get(level) {
                    None => leaf(id)?,
                    Some(family) => {
                        let child = family.get(id).ok_or_else(|| {
                            Error::structure(format!("index set for `{id}` is not defined"))
                        })?;
                        go(idx, level + 1, shape.flip(), child, leaf, combine)?
                    }
                });
            }
            combine(shape, parts)
        }
        go(self, 0, self.outer, &self.top, leaf, combine)
    }
}

fn nonempty_set<I, S>(ids: I) -> Result<IndexSet>
where
    I: IntoIterator<Item = S>,
    S: Into<BlockId>,
{
    let set: IndexSet = ids.into_iter().map(Into::into).collect();
    if set.is_empty() {
        return Err(Error::structure("index set is empty"));
    }
    Ok(set)
}

/// `X₁ · X₂ · … · Xₙ` over the blocks, in canonical order.
pub fn series<I, S>(ids: I) -> Result<Expr>
where
    I: IntoIterator<Item = S>,
    S: Into<BlockId>,
{
    Ok(Expr::NaryAnd(nonempty_set(ids)?.into_iter().map(Expr::Var).collect()))
}

/// `X₁ + X₂ + … + Xₙ` over the blocks, in canonical order.
pub fn parallel<I, S>(ids: I) -> Result<Expr>
where
    I: IntoIterator<Item = S>,
    S: Into<BlockId>,
{
    Ok(Expr::NaryOr(nonempty_set(ids)?.into_iter().map(Expr::Var).collect()))
}

/// Expression tree of a nested structure; each leaf index is replaced by
/// `leaf(index)`, which may be any sub-expression.
pub fn build_nested(idx: &NestedIndex, leaf: &dyn Fn(&str) -> Option<Expr>) -> Result<Expr> {
    idx.fold(
        &mut |id| {
            leaf(id).ok_or_else(|| Error::structure(format!("no expression for leaf index `{id}`")))
        },
        &mut |shape, parts| {
            Ok(match shape {
                Shape::Series => Expr::NaryAnd(parts),
                Shape::Parallel => Expr::NaryOr(parts),
            })
        },
    )
}
