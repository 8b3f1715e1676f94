//! Simplification of structure functions by rewriting, and a sampled
//! equivalence checker.
//!
//! Rules are written over the metavariables `X`, `Y`, `Z` and are matched
//! modulo associativity and commutativity of `·` and `+` (and commutativity
//! of `Δ`): chains of `·`/`+` are kept flattened and sorted while rewriting,
//! and a binary pattern such as `X + (X · Y)` may pick any two arguments of
//! a longer chain.
//!
//! Strategy: innermost first, first matching rule, until no rule applies.
//! Every rewriting rule of the reduce set strictly shrinks the term, so
//! reduction always terminates; the expand set adds distributive laws and
//! can grow terms, which is why it is opt-in and step-bounded.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::{eval_expr, Expr, Sample};
use crate::model::DrbdModel;
use crate::montecarlo::{for_each_sample, sample_at};
use crate::time::ExtTime;

/// Default rewrite budget used by the command line.
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Size-non-increasing rules only.
    Reduce,
    /// Adds the distributive laws.
    Expand,
}

/// How [`simplify`] uses a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Usage {
    /// Applied as a directed rewrite `lhs → rhs`.
    Rewrite,
    /// Associativity and commutativity; realised by flattening and sorting.
    Normalize,
    /// A verified identity that is not used as a directed rewrite, because
    /// orienting it would make rewriting cycle.
    Reference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideCondition {
    /// Every failure time bound to the metavariables is `≥ 0`. Always true
    /// for well-formed expressions, since [`ExtTime`] is nonnegative.
    NonNegative,
}

impl SideCondition {
    fn holds(self, _bindings: &Bindings) -> bool {
        match self {
            SideCondition::NonNegative => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteRule {
    pub name: &'static str,
    pub lhs: Expr,
    pub rhs: Expr,
    pub side_condition: Option<SideCondition>,
    pub mode: Mode,
    pub usage: Usage,
}

impl RewriteRule {
    /// Metavariables of `rhs` that do not occur in `lhs`; empty for a valid
    /// rule.
    pub fn unbound_metavariables(&self) -> Vec<String> {
        let lhs = self.lhs.ref_counts();
        self.rhs
            .ref_counts()
            .into_keys()
            .filter(|m| !lhs.contains_key(m))
            .map(str::to_string)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleSet {
    rules: Vec<RewriteRule>,
    mode: Mode,
}

impl RuleSet {
    pub fn new(rules: Vec<RewriteRule>, mode: Mode) -> Self {
        RuleSet { rules, mode }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn get(&self, name: &str) -> Option<&RewriteRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Rules [`simplify`] applies as directed rewrites under the current mode.
    pub fn active(&self) -> impl Iterator<Item = &RewriteRule> {
        self.rules.iter().filter(move |r| {
            r.usage == Usage::Rewrite && (r.mode == Mode::Reduce || self.mode == Mode::Expand)
        })
    }
}

fn x() -> Expr {
    Expr::var("X")
}
fn y() -> Expr {
    Expr::var("Y")
}
fn z() -> Expr {
    Expr::var("Z")
}

fn rule(name: &'static str, lhs: Expr, rhs: Expr, mode: Mode, usage: Usage) -> RewriteRule {
    RewriteRule { name, lhs, rhs, side_condition: None, mode, usage }
}

/// `X ▷ (Y ▷ Z) = ((X ▷ Y) + (X ▷ Z)) · (Y ▷ Z)`.
///
/// Not an identity: with `X > Y > Z` the left side is `X` and the right
/// side `Y`. Kept only so the failure can be demonstrated; the rule set
/// carries [`after_nested`] instead.
pub fn after_nested_conjunctive() -> RewriteRule {
    rule(
        "after_nested_conjunctive",
        Expr::after(x(), Expr::after(y(), z())),
        Expr::and(
            Expr::or(Expr::after(x(), y()), Expr::after(x(), z())),
            Expr::after(y(), z()),
        ),
        Mode::Expand,
        Usage::Reference,
    )
}

/// `X ▷ (Y ▷ Z) = ((X ▷ Y) + (X ▷ Z)) ▷ (Y ▷ Z)`.
///
/// Its right side contains another instance of the left pattern, so it is
/// never used as a directed rewrite.
pub fn after_nested() -> RewriteRule {
    rule(
        "after_nested",
        Expr::after(x(), Expr::after(y(), z())),
        Expr::after(
            Expr::or(Expr::after(x(), y()), Expr::after(x(), z())),
            Expr::after(y(), z()),
        ),
        Mode::Expand,
        Usage::Reference,
    )
}

/// The full simplification rule set, in reduce mode.
pub fn builtin_rules() -> RuleSet {
    use Mode::{Expand, Reduce};
    use Usage::{Normalize, Reference, Rewrite};

    let mut and_always = rule("and_always", Expr::and(x(), Expr::Always), Expr::Always, Reduce, Rewrite);
    and_always.side_condition = Some(SideCondition::NonNegative);
    let mut or_always = rule("or_always", Expr::or(x(), Expr::Always), x(), Reduce, Rewrite);
    or_always.side_condition = Some(SideCondition::NonNegative);

    let rules = vec![
        and_always,
        rule(
            "and_assoc",
            Expr::and(Expr::and(x(), y()), z()),
            Expr::and(x(), Expr::and(y(), z())),
            Reduce,
            Normalize,
        ),
        rule("and_comm", Expr::and(x(), y()), Expr::and(y(), x()), Reduce, Normalize),
        rule("and_idem", Expr::and(x(), x()), x(), Reduce, Rewrite),
        rule("and_never", Expr::and(x(), Expr::Never), x(), Reduce, Rewrite),
        or_always,
        rule(
            "or_assoc",
            Expr::or(Expr::or(x(), y()), z()),
            Expr::or(x(), Expr::or(y(), z())),
            Reduce,
            Normalize,
        ),
        rule("or_comm", Expr::or(x(), y()), Expr::or(y(), x()), Reduce, Normalize),
        rule("or_idem", Expr::or(x(), x()), x(), Reduce, Rewrite),
        rule("or_never", Expr::or(x(), Expr::Never), Expr::Never, Reduce, Rewrite),
        rule("absorb", Expr::or(x(), Expr::and(x(), y())), x(), Reduce, Rewrite),
        after_nested(),
        rule(
            "after_antisym",
            Expr::or(Expr::after(x(), y()), Expr::after(y(), x())),
            Expr::Never,
            Reduce,
            Rewrite,
        ),
        rule(
            "after_and_distr",
            Expr::after(x(), Expr::and(y(), z())),
            Expr::and(Expr::after(x(), y()), Expr::after(x(), z())),
            Expand,
            Rewrite,
        ),
        rule(
            "and_or_distr",
            Expr::and(x(), Expr::or(y(), z())),
            Expr::or(Expr::and(x(), y()), Expr::and(x(), z())),
            Expand,
            Rewrite,
        ),
        // the dual law would undo and_or_distr
        rule(
            "or_and_distr",
            Expr::or(x(), Expr::and(y(), z())),
            Expr::and(Expr::or(x(), y()), Expr::or(x(), z())),
            Expand,
            Reference,
        ),
        // oriented towards the smaller side
        rule(
            "incl_after_fold",
            Expr::and(Expr::after(x(), y()), Expr::simult(x(), y())),
            Expr::incl_after(x(), y()),
            Reduce,
            Rewrite,
        ),
        rule(
            "after_or_distr",
            Expr::after(x(), Expr::or(y(), z())),
            Expr::or(Expr::after(x(), y()), Expr::after(x(), z())),
            Expand,
            Rewrite,
        ),
        rule("simult_comm", Expr::simult(x(), y()), Expr::simult(y(), x()), Reduce, Normalize),
    ];
    RuleSet::new(rules, Reduce)
}

type Bindings = BTreeMap<String, Expr>;

fn remove_two<T: Clone>(xs: &[T], i: usize, j: usize) -> Vec<T> {
    xs.iter()
        .enumerate()
        .filter(|&(k, _)| k != i && k != j)
        .map(|(_, v)| v.clone())
        .collect()
}

fn rebuild(ctor: fn(Vec<Expr>) -> Expr, mut xs: Vec<Expr>) -> Expr {
    if xs.len() == 1 {
        xs.pop().unwrap()
    } else {
        ctor(xs)
    }
}

/// All ways `p` matches `e` extending `b`.
fn match_pattern(p: &Expr, e: &Expr, b: &Bindings) -> Vec<Bindings> {
    match (p, e) {
        (Expr::Var(m), _) => match b.get(m) {
            Some(bound) if bound == e => vec![b.clone()],
            Some(_) => vec![],
            None => {
                let mut b = b.clone();
                b.insert(m.clone(), e.clone());
                vec![b]
            }
        },
        (Expr::Always, Expr::Always) | (Expr::Never, Expr::Never) => vec![b.clone()],
        (Expr::And(p1, p2), Expr::NaryAnd(args)) => match_chain(p1, p2, args, Expr::NaryAnd, b),
        (Expr::Or(p1, p2), Expr::NaryOr(args)) => match_chain(p1, p2, args, Expr::NaryOr, b),
        (Expr::And(p1, p2), Expr::And(e1, e2))
        | (Expr::Or(p1, p2), Expr::Or(e1, e2))
        | (Expr::Simult(p1, p2), Expr::Simult(e1, e2)) => {
            let mut out = match_seq(&[(p1, e1), (p2, e2)], b);
            out.extend(match_seq(&[(p1, e2), (p2, e1)], b));
            out
        }
        (Expr::After(p1, p2), Expr::After(e1, e2))
        | (Expr::InclAfter(p1, p2), Expr::InclAfter(e1, e2)) => match_seq(&[(p1, e1), (p2, e2)], b),
        _ => vec![],
    }
}

fn match_seq(pairs: &[(&Expr, &Expr)], b: &Bindings) -> Vec<Bindings> {
    let mut acc = vec![b.clone()];
    for (p, e) in pairs {
        acc = acc.iter().flat_map(|b| match_pattern(p, e, b)).collect();
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Matches a binary AC pattern against a whole chain: one side takes a
/// single argument, the other the rest of the chain.
fn match_chain(p1: &Expr, p2: &Expr, args: &[Expr], ctor: fn(Vec<Expr>) -> Expr, b: &Bindings) -> Vec<Bindings> {
    let mut out = Vec::new();
    for i in 0..args.len() {
        let rest = rebuild(ctor, remove_two(args, i, i));
        out.extend(match_seq(&[(p1, &args[i]), (p2, &rest)], b));
        out.extend(match_seq(&[(p2, &args[i]), (p1, &rest)], b));
    }
    out
}

fn instantiate(t: &Expr, b: &Bindings) -> Expr {
    match t {
        Expr::Var(m) => b.get(m).cloned().unwrap_or_else(|| t.clone()),
        Expr::Always | Expr::Never => t.clone(),
        Expr::And(p, q) => Expr::and(instantiate(p, b), instantiate(q, b)),
        Expr::Or(p, q) => Expr::or(instantiate(p, b), instantiate(q, b)),
        Expr::After(p, q) => Expr::after(instantiate(p, b), instantiate(q, b)),
        Expr::Simult(p, q) => Expr::simult(instantiate(p, b), instantiate(q, b)),
        Expr::InclAfter(p, q) => Expr::incl_after(instantiate(p, b), instantiate(q, b)),
        Expr::Wsp(m, s) => Expr::Wsp(Box::new(instantiate(m, b)), s.clone()),
        Expr::Csp(m, s) => Expr::Csp(Box::new(instantiate(m, b)), s.clone()),
        Expr::Hsp(m, s) => Expr::Hsp(Box::new(instantiate(m, b)), s.clone()),
        Expr::NaryAnd(xs) => Expr::NaryAnd(xs.iter().map(|x| instantiate(x, b)).collect()),
        Expr::NaryOr(xs) => Expr::NaryOr(xs.iter().map(|x| instantiate(x, b)).collect()),
    }
}

fn side_ok(rule: &RewriteRule, b: &Bindings) -> bool {
    rule.side_condition.is_none_or(|c| c.holds(b))
}

/// Rewrites `e` at its root with `rule`, if it matches.
fn rewrite_root(rule: &RewriteRule, e: &Expr) -> Option<Expr> {
    if let Some(b) = match_pattern(&rule.lhs, e, &Bindings::new())
        .into_iter()
        .find(|b| side_ok(rule, b))
    {
        return Some(instantiate(&rule.rhs, &b));
    }
    // a binary pattern against two arguments of a longer chain
    let (p1, p2, args, ctor): (&Expr, &Expr, &[Expr], fn(Vec<Expr>) -> Expr) = match (&rule.lhs, e) {
        (Expr::And(p1, p2), Expr::NaryAnd(args)) => (p1, p2, args, Expr::NaryAnd),
        (Expr::Or(p1, p2), Expr::NaryOr(args)) => (p1, p2, args, Expr::NaryOr),
        _ => return None,
    };
    if args.len() <= 2 {
        return None;
    }
    for i in 0..args.len() {
        for j in 0..args.len() {
            if i == j {
                continue;
            }
            let found = match_seq(&[(p1, &args[i]), (p2, &args[j])], &Bindings::new())
                .into_iter()
                .find(|b| side_ok(rule, b));
            if let Some(b) = found {
                let mut rest = remove_two(args, i, j);
                rest.push(instantiate(&rule.rhs, &b));
                return Some(ctor(rest));
            }
        }
    }
    None
}

fn flatten_into(xs: Vec<Expr>, is_and: bool, out: &mut Vec<Expr>) {
    for x in xs {
        match (x, is_and) {
            (Expr::NaryAnd(ys), true) | (Expr::NaryOr(ys), false) => flatten_into(ys, is_and, out),
            (Expr::And(a, b), true) | (Expr::Or(a, b), false) => flatten_into(vec![*a, *b], is_and, out),
            (x, _) => out.push(x),
        }
    }
}

fn chain(xs: Vec<Expr>, is_and: bool) -> Expr {
    let mut flat = Vec::with_capacity(xs.len());
    flatten_into(xs, is_and, &mut flat);
    flat.sort();
    rebuild(if is_and { Expr::NaryAnd } else { Expr::NaryOr }, flat)
}

/// Canonical form of one node whose children are already canonical.
fn canon(e: Expr) -> Expr {
    match e {
        Expr::And(a, b) => chain(vec![*a, *b], true),
        Expr::Or(a, b) => chain(vec![*a, *b], false),
        Expr::NaryAnd(xs) if !xs.is_empty() => chain(xs, true),
        Expr::NaryOr(xs) if !xs.is_empty() => chain(xs, false),
        Expr::Simult(a, b) if b < a => Expr::Simult(b, a),
        e => e,
    }
}

fn map_children(e: Expr, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
    let mut bx = |x: Box<Expr>| Box::new(f(*x));
    match e {
        Expr::And(a, b) => Expr::And(bx(a), bx(b)),
        Expr::Or(a, b) => Expr::Or(bx(a), bx(b)),
        Expr::After(a, b) => Expr::After(bx(a), bx(b)),
        Expr::Simult(a, b) => Expr::Simult(bx(a), bx(b)),
        Expr::InclAfter(a, b) => Expr::InclAfter(bx(a), bx(b)),
        Expr::Wsp(m, s) => Expr::Wsp(bx(m), s),
        Expr::Csp(m, s) => Expr::Csp(bx(m), s),
        Expr::Hsp(m, s) => Expr::Hsp(bx(m), s),
        Expr::NaryAnd(xs) => Expr::NaryAnd(xs.into_iter().map(&mut *f).collect()),
        Expr::NaryOr(xs) => Expr::NaryOr(xs.into_iter().map(&mut *f).collect()),
        leaf => leaf,
    }
}

fn canon_deep(e: Expr) -> Expr {
    canon(map_children(e, &mut canon_deep))
}

/// Binary form of a canonical term: chains become left-nested `·` / `+`.
fn to_binary(e: Expr) -> Expr {
    let fold = |xs: Vec<Expr>, op: fn(Expr, Expr) -> Expr| {
        let mut it = xs.into_iter().map(to_binary);
        let first = it.next().expect("canonical chains are nonempty");
        it.fold(first, op)
    };
    match e {
        Expr::NaryAnd(xs) => fold(xs, Expr::and),
        Expr::NaryOr(xs) => fold(xs, Expr::or),
        e => map_children(e, &mut to_binary),
    }
}

/// One innermost-first rewrite step on a canonical term. The result is
/// canonical again.
fn rewrite_once(e: &Expr, rules: &[&RewriteRule]) -> Option<Expr> {
    let replace_child = |e: &Expr| -> Option<Expr> {
        match e {
            Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::After(a, b)
            | Expr::Simult(a, b)
            | Expr::InclAfter(a, b) => {
                if let Some(na) = rewrite_once(a, rules) {
                    return Some(with_binary_children(e, na, (**b).clone()));
                }
                rewrite_once(b, rules).map(|nb| with_binary_children(e, (**a).clone(), nb))
            }
            Expr::Wsp(m, s) => rewrite_once(m, rules).map(|nm| Expr::Wsp(Box::new(nm), s.clone())),
            Expr::Csp(m, s) => rewrite_once(m, rules).map(|nm| Expr::Csp(Box::new(nm), s.clone())),
            Expr::Hsp(m, s) => rewrite_once(m, rules).map(|nm| Expr::Hsp(Box::new(nm), s.clone())),
            Expr::NaryAnd(xs) | Expr::NaryOr(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if let Some(nx) = rewrite_once(x, rules) {
                        let mut ys = xs.clone();
                        ys[i] = nx;
                        return Some(match e {
                            Expr::NaryAnd(_) => Expr::NaryAnd(ys),
                            _ => Expr::NaryOr(ys),
                        });
                    }
                }
                None
            }
            Expr::Always | Expr::Never | Expr::Var(_) => None,
        }
    };
    if let Some(next) = replace_child(e) {
        return Some(canon(next));
    }
    rules
        .iter()
        .find_map(|r| rewrite_root(r, e))
        .map(canon_deep)
}

fn with_binary_children(e: &Expr, a: Expr, b: Expr) -> Expr {
    match e {
        Expr::And(..) => Expr::and(a, b),
        Expr::Or(..) => Expr::or(a, b),
        Expr::After(..) => Expr::after(a, b),
        Expr::Simult(..) => Expr::simult(a, b),
        Expr::InclAfter(..) => Expr::incl_after(a, b),
        _ => unreachable!("not a binary node"),
    }
}

/// Rewrites `e` to normal form under the active rules of `rules`.
///
/// After the fixpoint, arguments of commutative operators are sorted by
/// [`Expr`]'s ordering and chains are left-nested, so two inputs with the
/// same normal form give structurally equal results. Running out of
/// `max_steps` rewrites is a [`Error::NonConvergence`] carrying the term
/// reached so far.
pub fn simplify(e: &Expr, rules: &RuleSet, max_steps: usize) -> Result<Expr> {
    if max_steps == 0 {
        return Err(Error::domain("rewrite step budget must be positive"));
    }
    e.check_well_formed()?;
    let active: Vec<&RewriteRule> = rules.active().collect();
    let mut current = canon_deep(e.clone());
    let mut steps = 0;
    while let Some(next) = rewrite_once(&current, &active) {
        if steps == max_steps {
            return Err(Error::NonConvergence { steps, partial: Box::new(to_binary(current)) });
        }
        steps += 1;
        current = next;
    }
    Ok(to_binary(current))
}

/// Verdict of [`check_equiv`].
#[derive(Clone, Debug, PartialEq)]
pub enum Equivalence {
    /// No difference on any of the drawn samples.
    Equivalent { samples: u64 },
    Counterexample { index: u64, sample: Sample, left: ExtTime, right: ExtTime },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Draws `n` samples from `model` and reports the first one on which `e1`
/// and `e2` evaluate differently.
pub fn check_equiv(e1: &Expr, e2: &Expr, model: &DrbdModel, n: u64, seed: u64) -> Result<Equivalence> {
    check_equiv_where(e1, e2, model, n, seed, &|_| true)
}

/// Like [`check_equiv`], ignoring samples for which `admit` is false (e.g.
/// samples with tied failure times for a rule that assumes distinct ones).
pub fn check_equiv_where(
    e1: &Expr,
    e2: &Expr,
    model: &DrbdModel,
    n: u64,
    seed: u64,
    admit: &dyn Fn(&Sample) -> bool,
) -> Result<Equivalence> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let (c1, c2) = (model.compile(e1)?, model.compile(e2)?);
    let mut found = None;
    for_each_sample(model, seed, 0..n, &mut |i, values| {
        let (l, r) = (c1.eval(values), c2.eval(values));
        if l != r {
            let sample = sample_at(model, seed, i)?;
            if admit(&sample) {
                debug_assert_eq!(eval_expr(e1, &sample)?, l);
                found = Some(Equivalence::Counterexample { index: i, sample, left: l, right: r });
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    Ok(found.unwrap_or(Equivalence::Equivalent { samples: n }))
}
