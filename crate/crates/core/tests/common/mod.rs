//! Helpers shared by the integration tests: test models, a random
//! expression generator and closed forms for exponential laws computed
//! independently of the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

use drbd_core::{BlockLaw, Distribution, DrbdModel, Expr, SpareSpec};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn exp(rate: f64) -> BlockLaw {
    BlockLaw::Basic(Distribution::exponential(rate).unwrap())
}

pub fn spare(rate: f64, alpha: f64) -> BlockLaw {
    BlockLaw::Spare(SpareSpec::exponential(rate, alpha).unwrap())
}

pub fn model(blocks: Vec<(&str, BlockLaw)>, root: Expr) -> DrbdModel {
    let blocks: BTreeMap<_, _> = blocks.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    DrbdModel::new("test", blocks, root).unwrap()
}

/// Law concentrated on {0, 1, 2, 3, ∞}, so that ties and infinite failure
/// times are frequent.
pub fn lumpy() -> Distribution {
    const ATOMS: [f64; 5] = [0.0, 1.0, 2.0, 3.0, f64::INFINITY];
    Distribution::custom(
        "lumpy",
        |t| ((t.floor() + 1.0).clamp(0.0, 4.0)) / 5.0,
        |_| 0.0,
        |u| ATOMS[((u * 5.0) as usize).min(4)],
    )
}

/// Models over the rule metavariables `X`, `Y`, `Z`.
pub fn rule_models() -> Vec<(&'static str, DrbdModel)> {
    let root = Expr::NaryAnd(vec![Expr::var("X"), Expr::var("Y"), Expr::var("Z")]);
    let weibull = || BlockLaw::Basic(Distribution::weibull(2.0, 1.0).unwrap());
    vec![
        ("exp(1)", model(vec![("X", exp(1.0)), ("Y", exp(1.0)), ("Z", exp(1.0))], root.clone())),
        ("exp(0.1)/exp(10)", model(vec![("X", exp(0.1)), ("Y", exp(10.0)), ("Z", exp(0.1))], root.clone())),
        ("weibull(2,1)", model(vec![("X", weibull()), ("Y", weibull()), ("Z", weibull())], root)),
    ]
}

pub fn tie_model() -> DrbdModel {
    let root = Expr::NaryAnd(vec![Expr::var("X"), Expr::var("Y"), Expr::var("Z")]);
    let l = || BlockLaw::Basic(lumpy());
    model(vec![("X", l()), ("Y", l()), ("Z", l())], root)
}

pub const EXPR_VARS: [&str; 5] = ["A", "B", "C", "D", "E"];
pub const EXPR_SPARES: [&str; 2] = ["S", "T"];

/// Blocks for random expressions: three exponential, two lumpy blocks, and
/// two spares.
pub fn expr_model() -> DrbdModel {
    model(
        vec![
            ("A", exp(1.0)),
            ("B", exp(0.5)),
            ("C", exp(2.0)),
            ("D", BlockLaw::Basic(lumpy())),
            ("E", BlockLaw::Basic(lumpy())),
            ("S", spare(1.0, 0.5)),
            ("T", spare(0.7, 0.0)),
        ],
        Expr::var("A"),
    )
}

pub struct ExprGen {
    rng: ChaCha8Rng,
}

impl ExprGen {
    pub fn new(seed: u64) -> Self {
        ExprGen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn below(&mut self, n: u32) -> u32 {
        self.rng.next_u32() % n
    }

    /// Random expression of depth at most `depth` over [`EXPR_VARS`],
    /// constants and every operator.
    pub fn expr(&mut self, depth: u32) -> Expr {
        if depth <= 1 || self.below(4) == 0 {
            return match self.below(12) {
                0 => Expr::Always,
                1 => Expr::Never,
                k => Expr::var(EXPR_VARS[(k % 5) as usize]),
            };
        }
        let d = depth - 1;
        match self.below(11) {
            0 | 1 => Expr::and(self.expr(d), self.expr(d)),
            2 | 3 => Expr::or(self.expr(d), self.expr(d)),
            4 => Expr::after(self.expr(d), self.expr(d)),
            5 => Expr::simult(self.expr(d), self.expr(d)),
            6 => Expr::incl_after(self.expr(d), self.expr(d)),
            7 => {
                let s = EXPR_SPARES[self.below(2) as usize];
                match self.below(3) {
                    0 => Expr::wsp(self.expr(d), s),
                    1 => Expr::csp(self.expr(d), s),
                    _ => Expr::hsp(self.expr(d), s),
                }
            }
            8 => {
                let n = 1 + self.below(4);
                Expr::NaryAnd((0..n).map(|_| self.expr(d)).collect())
            }
            9 => {
                let n = 1 + self.below(4);
                Expr::NaryOr((0..n).map(|_| self.expr(d)).collect())
            }
            _ => {
                // an instance of a rule's left side, so that rules fire
                let (x, y) = (self.expr(d), self.expr(d));
                match self.below(4) {
                    0 => Expr::or(x.clone(), Expr::and(x, y)),
                    1 => Expr::or(Expr::after(x.clone(), y.clone()), Expr::after(y, x)),
                    2 => Expr::and(Expr::after(x.clone(), y.clone()), Expr::simult(x, y)),
                    _ => Expr::and(x.clone(), x),
                }
            }
        }
    }
}

/// `P(X ≤ Y or Y fails first)` complement, i.e. Rel of `X ▷ Y` for
/// exponential `X`, `Y`: `e^{-λx t} + λx/(λx+λy)·(1 - e^{-(λx+λy)t})`.
pub fn exp_after(lx: f64, ly: f64, t: f64) -> f64 {
    (-lx * t).exp() + lx / (lx + ly) * (1.0 - (-(lx + ly) * t).exp())
}

/// `μ·e^{-λt}·(1 - e^{-ct})/c`, continuous at `c = 0`.
fn damped(mu: f64, lam: f64, c: f64, t: f64) -> f64 {
    let g = if c.abs() < 1e-12 { t } else { -(-c * t).exp_m1() / c };
    mu * (-lam * t).exp() * g
}

/// Main `exp(μ)`, cold spare `exp(λ)`: survival of the sum of the two.
pub fn exp_csp(mu: f64, lam: f64, t: f64) -> f64 {
    (-mu * t).exp() + damped(mu, lam, mu - lam, t)
}

/// Main `exp(μ)`, warm spare active `exp(λ)`, dormant `exp(αλ)`:
/// `e^{-μt} + μ e^{-λt} (1 - e^{-(μ+αλ-λ)t}) / (μ+αλ-λ)`.
pub fn exp_wsp(mu: f64, lam: f64, alpha: f64, t: f64) -> f64 {
    (-mu * t).exp() + damped(mu, lam, mu + alpha * lam - lam, t)
}

pub fn exp_rel(rate: f64, t: f64) -> f64 {
    (-rate * t).exp()
}

pub fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}
