//! Structure-function expressions and their exact evaluation over a sample
//! of failure times.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::time::{after, ext_max, ext_min, incl_after, simult, ExtTime};

/// Identifier of a basic block or spare.
pub type BlockId = String;

/// Structure function of a DRBD.
///
/// The derived ordering is the canonical key used for commutative
/// arguments: constants first, then variables by name, then compound nodes
/// by constructor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Always,
    Never,
    Var(BlockId),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    After(Box<Expr>, Box<Expr>),
    Simult(Box<Expr>, Box<Expr>),
    InclAfter(Box<Expr>, Box<Expr>),
    /// Warm spare: main sub-structure and the spare block carrying both
    /// dormant and active failure behaviour.
    Wsp(Box<Expr>, BlockId),
    Csp(Box<Expr>, BlockId),
    Hsp(Box<Expr>, BlockId),
    NaryAnd(Vec<Expr>),
    NaryOr(Vec<Expr>),
}

impl Expr {
    pub fn var(id: impl Into<BlockId>) -> Expr {
        Expr::Var(id.into())
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn after(a: Expr, b: Expr) -> Expr {
        Expr::After(Box::new(a), Box::new(b))
    }

    pub fn simult(a: Expr, b: Expr) -> Expr {
        Expr::Simult(Box::new(a), Box::new(b))
    }

    pub fn incl_after(a: Expr, b: Expr) -> Expr {
        Expr::InclAfter(Box::new(a), Box::new(b))
    }

    pub fn wsp(main: Expr, spare: impl Into<BlockId>) -> Expr {
        Expr::Wsp(Box::new(main), spare.into())
    }

    pub fn csp(main: Expr, spare: impl Into<BlockId>) -> Expr {
        Expr::Csp(Box::new(main), spare.into())
    }

    pub fn hsp(main: Expr, spare: impl Into<BlockId>) -> Expr {
        Expr::Hsp(Box::new(main), spare.into())
    }

    /// Number of nodes; variables and spare references count as one each.
    pub fn size(&self) -> usize {
        match self {
            Expr::Always | Expr::Never | Expr::Var(_) => 1,
            Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::After(a, b)
            | Expr::Simult(a, b)
            | Expr::InclAfter(a, b) => 1 + a.size() + b.size(),
            Expr::Wsp(m, _) | Expr::Csp(m, _) | Expr::Hsp(m, _) => 2 + m.size(),
            Expr::NaryAnd(xs) | Expr::NaryOr(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
        }
    }

    /// Calls `f` on every block reference in left-to-right order. The flag
    /// is `true` for a spare reference inside a spare construct.
    pub fn visit_refs<'a>(&'a self, f: &mut impl FnMut(&'a str, bool)) {
        match self {
            Expr::Always | Expr::Never => {}
            Expr::Var(id) => f(id, false),
            Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::After(a, b)
            | Expr::Simult(a, b)
            | Expr::InclAfter(a, b) => {
                a.visit_refs(f);
                b.visit_refs(f);
            }
            Expr::Wsp(m, s) | Expr::Csp(m, s) | Expr::Hsp(m, s) => {
                m.visit_refs(f);
                f(s, true);
            }
            Expr::NaryAnd(xs) | Expr::NaryOr(xs) => xs.iter().for_each(|x| x.visit_refs(f)),
        }
    }

    /// Occurrence count of every referenced block.
    pub fn ref_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        self.visit_refs(&mut |id, _| *counts.entry(id).or_insert(0) += 1);
        counts
    }

    /// Checks the structural invariant that n-ary argument lists are nonempty.
    pub fn check_well_formed(&self) -> Result<()> {
        match self {
            Expr::Always | Expr::Never | Expr::Var(_) => Ok(()),
            Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::After(a, b)
            | Expr::Simult(a, b)
            | Expr::InclAfter(a, b) => {
                a.check_well_formed()?;
                b.check_well_formed()
            }
            Expr::Wsp(m, _) | Expr::Csp(m, _) | Expr::Hsp(m, _) => m.check_well_formed(),
            Expr::NaryAnd(xs) | Expr::NaryOr(xs) => {
                if xs.is_empty() {
                    return Err(Error::structure("n-ary operator with an empty argument list"));
                }
                xs.iter().try_for_each(Expr::check_well_formed)
            }
        }
    }
}

/// Sampled state of one block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleValue {
    Basic(ExtTime),
    /// A spare: the instant it would fail while dormant, and its residual
    /// lifetime once activated.
    Spare { dormant: ExtTime, active_offset: f64 },
}

/// Name-to-slot table shared by every sample of a model.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct BlockIndex {
    names: Vec<BlockId>,
    lookup: HashMap<BlockId, usize>,
}

impl BlockIndex {
    pub fn new(names: impl IntoIterator<Item = BlockId>) -> Result<Self> {
        let mut index = BlockIndex::default();
        for name in names {
            if index.lookup.contains_key(&name) {
                return Err(Error::model(format!("duplicate block `{name}`")));
            }
            index.lookup.insert(name.clone(), index.names.len());
            index.names.push(name);
        }
        Ok(index)
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn names(&self) -> &[BlockId] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One valuation of every block of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    index: Arc<BlockIndex>,
    values: Vec<SampleValue>,
}

impl Sample {
    pub fn new(index: Arc<BlockIndex>, values: Vec<SampleValue>) -> Result<Self> {
        if index.len() != values.len() {
            return Err(Error::model(format!(
                "sample has {} values for {} blocks",
                values.len(),
                index.len()
            )));
        }
        for v in &values {
            if let SampleValue::Spare { active_offset, .. } = *v {
                if !(active_offset >= 0.0 && active_offset.is_finite()) {
                    return Err(Error::domain(format!(
                        "active offset must be finite and nonnegative, got {active_offset}"
                    )));
                }
            }
        }
        Ok(Sample { index, values })
    }

    /// Convenience constructor from `(name, value)` pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, SampleValue)>,
        S: Into<BlockId>,
    {
        let (names, values): (Vec<BlockId>, Vec<SampleValue>) =
            pairs.into_iter().map(|(n, v)| (n.into(), v)).unzip();
        Sample::new(Arc::new(BlockIndex::new(names)?), values)
    }

    pub fn get(&self, name: &str) -> Option<SampleValue> {
        self.index.slot(name).map(|i| self.values[i])
    }

    pub fn values(&self) -> &[SampleValue] {
        &self.values
    }

    pub fn index(&self) -> &Arc<BlockIndex> {
        &self.index
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SampleValue)> + '_ {
        self.index.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

/// Effective `(active, dormant)` failure instants of a spare whose main part
/// fails at `main`.
///
/// The spare fails in exactly one state: if the dormant failure comes
/// strictly before the main failure the active state is never entered,
/// otherwise the spare is activated at `main` and runs for `active_offset`.
pub fn spare_states(main: ExtTime, dormant: ExtTime, active_offset: f64) -> (ExtTime, ExtTime) {
    if dormant < main {
        (ExtTime::INF, dormant)
    } else {
        (main.shifted(active_offset), ExtTime::INF)
    }
}

/// `(X_a ▷ Y) · (Y ▷ X_d)` with the effective spare states.
pub fn wsp_time(main: ExtTime, dormant: ExtTime, active_offset: f64) -> ExtTime {
    let (active, dormant) = spare_states(main, dormant, active_offset);
    ext_min(after(active, main), after(main, dormant))
}

/// Cold spare: the spare starts at the main failure and fails `active_offset`
/// later; `if Y < X then X else INF`.
pub fn csp_time(main: ExtTime, active_offset: f64) -> ExtTime {
    after(main.shifted(active_offset), main)
}

/// Hot spare: both run from time zero, `max(Y, X)`.
pub fn hsp_time(main: ExtTime, active_offset: f64) -> ExtTime {
    ext_max(main, ExtTime::ZERO.shifted(active_offset))
}

/// Evaluates the structure function on one sample.
pub fn eval_expr(e: &Expr, s: &Sample) -> Result<ExtTime> {
    let basic = |id: &str| match s.get(id) {
        Some(SampleValue::Basic(t)) => Ok(t),
        Some(SampleValue::Spare { .. }) => Err(Error::model(format!(
            "spare `{id}` referenced outside a spare construct"
        ))),
        None => Err(Error::model(format!("unbound block `{id}`"))),
    };
    let spare = |id: &str| match s.get(id) {
        Some(SampleValue::Spare { dormant, active_offset }) => Ok((dormant, active_offset)),
        Some(SampleValue::Basic(_)) => Err(Error::model(format!(
            "block `{id}` used as a spare but is not declared as one"
        ))),
        None => Err(Error::model(format!("unbound spare `{id}`"))),
    };
    Ok(match e {
        Expr::Always => ExtTime::ZERO,
        Expr::Never => ExtTime::INF,
        Expr::Var(id) => basic(id)?,
        Expr::And(a, b) => ext_min(eval_expr(a, s)?, eval_expr(b, s)?),
        Expr::Or(a, b) => ext_max(eval_expr(a, s)?, eval_expr(b, s)?),
        Expr::After(a, b) => after(eval_expr(a, s)?, eval_expr(b, s)?),
        Expr::Simult(a, b) => simult(eval_expr(a, s)?, eval_expr(b, s)?),
        Expr::InclAfter(a, b) => incl_after(eval_expr(a, s)?, eval_expr(b, s)?),
        Expr::Wsp(m, id) => {
            let main = eval_expr(m, s)?;
            let (dormant, offset) = spare(id)?;
            wsp_time(main, dormant, offset)
        }
        Expr::Csp(m, id) => {
            let main = eval_expr(m, s)?;
            csp_time(main, spare(id)?.1)
        }
        Expr::Hsp(m, id) => {
            let main = eval_expr(m, s)?;
            hsp_time(main, spare(id)?.1)
        }
        Expr::NaryAnd(xs) => xs
            .iter()
            .try_fold(ExtTime::INF, |acc, x| Ok::<_, Error>(ext_min(eval_expr(x, s)?, acc)))?,
        Expr::NaryOr(xs) => xs
            .iter()
            .try_fold(ExtTime::ZERO, |acc, x| Ok::<_, Error>(ext_max(eval_expr(x, s)?, acc)))?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    And,
    Or,
    After,
    Simult,
    InclAfter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SpareOp {
    Warm,
    Cold,
    Hot,
}

/// Slot kind expected by a compiled expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Basic,
    Spare,
}

/// An expression with block names resolved to sample slots, for the
/// Monte Carlo inner loop.
#[derive(Clone, Debug)]
pub enum CompiledExpr {
    Const(ExtTime),
    Slot(usize),
    Bin(BinOpTag, Box<CompiledExpr>, Box<CompiledExpr>),
    Spare(SpareTag, Box<CompiledExpr>, usize),
    Min(Vec<CompiledExpr>),
    Max(Vec<CompiledExpr>),
}

/// Opaque binary operator tag of a [`CompiledExpr`].
#[derive(Clone, Copy, Debug)]
pub struct BinOpTag(BinOp);

/// Opaque spare construct tag of a [`CompiledExpr`].
#[derive(Clone, Copy, Debug)]
pub struct SpareTag(SpareOp);

impl CompiledExpr {
    /// Resolves every reference through `resolve`, which returns the slot
    /// and its kind.
    pub fn compile(e: &Expr, resolve: &dyn Fn(&str) -> Option<(usize, SlotKind)>) -> Result<Self> {
        let slot = |id: &str, want: SlotKind| -> Result<usize> {
            match resolve(id) {
                Some((i, kind)) if kind == want => Ok(i),
                Some((_, SlotKind::Spare)) => Err(Error::model(format!(
                    "spare `{id}` referenced outside a spare construct"
                ))),
                Some((_, SlotKind::Basic)) => Err(Error::model(format!(
                    "block `{id}` used as a spare but is not declared as one"
                ))),
                None => Err(Error::model(format!("unbound block `{id}`"))),
            }
        };
        let bin = |op, a: &Expr, b: &Expr| -> Result<CompiledExpr> {
            Ok(CompiledExpr::Bin(
                BinOpTag(op),
                Box::new(Self::compile(a, resolve)?),
                Box::new(Self::compile(b, resolve)?),
            ))
        };
        let spare = |op, m: &Expr, id: &str| -> Result<CompiledExpr> {
            Ok(CompiledExpr::Spare(
                SpareTag(op),
                Box::new(Self::compile(m, resolve)?),
                slot(id, SlotKind::Spare)?,
            ))
        };
        Ok(match e {
            Expr::Always => CompiledExpr::Const(ExtTime::ZERO),
            Expr::Never => CompiledExpr::Const(ExtTime::INF),
            Expr::Var(id) => CompiledExpr::Slot(slot(id, SlotKind::Basic)?),
            Expr::And(a, b) => bin(BinOp::And, a, b)?,
            Expr::Or(a, b) => bin(BinOp::Or, a, b)?,
            Expr::After(a, b) => bin(BinOp::After, a, b)?,
            Expr::Simult(a, b) => bin(BinOp::Simult, a, b)?,
            Expr::InclAfter(a, b) => bin(BinOp::InclAfter, a, b)?,
            Expr::Wsp(m, id) => spare(SpareOp::Warm, m, id)?,
            Expr::Csp(m, id) => spare(SpareOp::Cold, m, id)?,
            Expr::Hsp(m, id) => spare(SpareOp::Hot, m, id)?,
            Expr::NaryAnd(xs) => CompiledExpr::Min(
                xs.iter().map(|x| Self::compile(x, resolve)).collect::<Result<_>>()?,
            ),
            Expr::NaryOr(xs) => CompiledExpr::Max(
                xs.iter().map(|x| Self::compile(x, resolve)).collect::<Result<_>>()?,
            ),
        })
    }

    /// Compiles against the slot layout of `index`, using `spares` to tell
    /// which slots hold spare values.
    pub fn compile_for(e: &Expr, index: &BlockIndex, is_spare: &dyn Fn(&str) -> bool) -> Result<Self> {
        Self::compile(e, &|id| {
            index.slot(id).map(|i| {
                (i, if is_spare(id) { SlotKind::Spare } else { SlotKind::Basic })
            })
        })
    }

    pub fn eval(&self, values: &[SampleValue]) -> ExtTime {
        match self {
            CompiledExpr::Const(t) => *t,
            CompiledExpr::Slot(i) => match values[*i] {
                SampleValue::Basic(t) => t,
                SampleValue::Spare { dormant, .. } => dormant,
            },
            CompiledExpr::Bin(BinOpTag(op), a, b) => {
                let (x, y) = (a.eval(values), b.eval(values));
                match op {
                    BinOp::And => ext_min(x, y),
                    BinOp::Or => ext_max(x, y),
                    BinOp::After => after(x, y),
                    BinOp::Simult => simult(x, y),
                    BinOp::InclAfter => incl_after(x, y),
                }
            }
            CompiledExpr::Spare(SpareTag(op), m, i) => {
                let main = m.eval(values);
                let (dormant, offset) = match values[*i] {
                    SampleValue::Spare { dormant, active_offset } => (dormant, active_offset),
                    SampleValue::Basic(t) => (t, 0.0),
                };
                match op {
                    SpareOp::Warm => wsp_time(main, dormant, offset),
                    SpareOp::Cold => csp_time(main, offset),
                    SpareOp::Hot => hsp_time(main, offset),
                }
            }
            CompiledExpr::Min(xs) => xs.iter().fold(ExtTime::INF, |acc, x| ext_min(acc, x.eval(values))),
            CompiledExpr::Max(xs) => xs.iter().fold(ExtTime::ZERO, |acc, x| ext_max(acc, x.eval(values))),
        }
    }
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_ATOM: u8 = 3;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => PREC_OR,
        Expr::And(..) => PREC_AND,
        _ => PREC_ATOM,
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, xs: &[Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Infix form accepted back by the model parser. `*` and `+` associate to
/// the left, so a right-nested chain keeps its parentheses.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Always => f.write_str("always"),
            Expr::Never => f.write_str("never"),
            Expr::Var(id) => f.write_str(id),
            Expr::Or(a, b) => {
                write_operand(f, a, PREC_OR)?;
                f.write_str(" + ")?;
                write_operand(f, b, PREC_AND)
            }
            Expr::And(a, b) => {
                write_operand(f, a, PREC_AND)?;
                f.write_str(" * ")?;
                write_operand(f, b, PREC_ATOM)
            }
            Expr::After(a, b) => write!(f, "after({a}, {b})"),
            Expr::Simult(a, b) => write!(f, "simult({a}, {b})"),
            Expr::InclAfter(a, b) => write!(f, "incl_after({a}, {b})"),
            Expr::Wsp(m, s) => write!(f, "wsp({m}, {s})"),
            Expr::Csp(m, s) => write!(f, "csp({m}, {s})"),
            Expr::Hsp(m, s) => write!(f, "hsp({m}, {s})"),
            Expr::NaryAnd(xs) => write_list(f, "series", xs),
            Expr::NaryOr(xs) => write_list(f, "parallel", xs),
        }
    }
}
