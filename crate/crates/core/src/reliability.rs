//! Closed-form and quadrature-based reliability of DRBD structures.
//!
//! `Rel(t)` is the probability that the structure is still working at `t`,
//! i.e. the measure of the event `{s | Q(s) > t}`. Compositional evaluation
//! relies on the blocks being independent, which holds structurally when
//! every block occurs exactly once in the expression (read-once).

use crate::distribution::{Distribution, SpareSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::{BlockLaw, DrbdModel};
use crate::quadrature::quadrature;
use crate::structures::{NestedIndex, Shape};

/// Default absolute tolerance of outer integrals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Lists longer than this are multiplied in log space.
const LOG_PRODUCT_THRESHOLD: usize = 32;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("mission time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

fn check_probabilities(rels: &[f64]) -> Result<()> {
    if rels.is_empty() {
        return Err(Error::structure("reliability of an empty structure"));
    }
    if let Some(r) = rels.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::domain(format!("reliability {r} outside [0, 1]")));
    }
    Ok(())
}

/// `∏ xs`, summing logarithms for long lists so that many small factors do
/// not underflow halfway through.
fn product(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    if xs.len() > LOG_PRODUCT_THRESHOLD {
        let mut log_sum = 0.0;
        for x in xs {
            if x == 0.0 {
                return 0.0;
            }
            log_sum += x.ln();
        }
        log_sum.exp()
    } else {
        xs.product()
    }
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `1 - F(t)`.
pub fn rel_basic(d: &Distribution, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(clamp_probability(d.survival(t)))
}

/// `∏ Rᵢ`.
pub fn rel_series(rels: &[f64]) -> Result<f64> {
    check_probabilities(rels)?;
    Ok(product(rels.iter().copied()))
}

/// `1 - ∏ (1 - Rᵢ)`.
pub fn rel_parallel(rels: &[f64]) -> Result<f64> {
    check_probabilities(rels)?;
    Ok(1.0 - product(rels.iter().map(|r| 1.0 - r)))
}

/// Alternating product / complement-product over a nested hierarchy.
pub fn rel_nested(idx: &NestedIndex, leaf_rel: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
    idx.fold(
        &mut |id| {
            let r = leaf_rel(id)
                .ok_or_else(|| Error::structure(format!("no reliability for leaf index `{id}`")))?;
            check_probabilities(&[r])?;
            Ok(r)
        },
        &mut |shape, parts| match shape {
            Shape::Series => rel_series(&parts),
            Shape::Parallel => rel_parallel(&parts),
        },
    )
}

/// Reliability of `X ▷ Y` for independent `X`, `Y`:
/// `1 - ∫₀ᵗ f_X(x) F_Y(x) dx`.
pub fn rel_after<P, C>(pdf_x: P, cdf_y: C, t: f64, tol: f64) -> Result<f64>
where
    P: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    check_time(t)?;
    let q = quadrature(|x| pdf_x(x) * cdf_y(x), 0.0, t, tol)?;
    Ok(clamp_probability(1.0 - q.value))
}

/// Warm spare reliability.
///
/// The spare fails either while dormant, before the main part
/// (`∫₀ᵗ f_Y(y) F_Xd(y) dy`), or after being activated at the main failure
/// `y` and running for its active lifetime, provided it survived dormancy
/// until `y` (`∫₀ᵗ f_Y(y) (1 - F_Xd(y)) F_Xa(t - y) dy`). The active
/// lifetime starts fresh at activation, so the inner integral over the
/// conditional density collapses to the active CDF.
pub fn rel_wsp(main: &Distribution, spare: &SpareSpec, t: f64, tol: f64) -> Result<f64> {
    check_time(t)?;
    let q = quadrature(
        |y| {
            let fd = spare.dormant_cdf(y);
            main.pdf(y) * ((1.0 - fd) * spare.active.cdf(t - y) + fd)
        },
        0.0,
        t,
        tol,
    )?;
    Ok(clamp_probability(1.0 - q.value))
}

/// Cold spare reliability: `1 - ∫₀ᵗ f_Y(y) F_Xa(t - y) dy`.
pub fn rel_csp(main: &Distribution, active: &Distribution, t: f64, tol: f64) -> Result<f64> {
    check_time(t)?;
    let q = quadrature(|y| main.pdf(y) * active.cdf(t - y), 0.0, t, tol)?;
    Ok(clamp_probability(1.0 - q.value))
}

/// Hot spare reliability: the spare ages at its active rate from time zero,
/// so the construct is the parallel of main and spare.
pub fn rel_hsp(main_rel: f64, active: &Distribution, t: f64) -> Result<f64> {
    rel_parallel(&[main_rel, rel_basic(active, t)?])
}

/// Fails with [`Error::IndependenceViolation`] unless every block occurs
/// exactly once in `e`.
pub fn check_read_once(e: &Expr) -> Result<()> {
    match e.ref_counts().into_iter().find(|&(_, n)| n > 1) {
        Some((id, _)) => Err(Error::IndependenceViolation(id.to_string())),
        None => Ok(()),
    }
}

/// Compositional reliability of a read-once model at `t`.
pub fn rel_expr(model: &DrbdModel, t: f64, tol: f64) -> Result<f64> {
    check_time(t)?;
    check_read_once(model.root())?;
    rel_node(model, model.root(), t, tol)
}

/// [`rel_expr`] over a grid of times.
pub fn rel_curve(model: &DrbdModel, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_read_once(model.root())?;
    times.iter().map(|&t| rel_expr(model, t, tol)).collect()
}

fn basic_law<'m>(model: &'m DrbdModel, id: &str) -> Result<&'m Distribution> {
    match model.block(id) {
        Some(BlockLaw::Basic(d)) => Ok(d),
        Some(BlockLaw::Spare(_)) => Err(Error::model(format!(
            "spare `{id}` referenced outside a spare construct"
        ))),
        None => Err(Error::model(format!("unknown block `{id}`"))),
    }
}

fn spare_law<'m>(model: &'m DrbdModel, id: &str) -> Result<&'m SpareSpec> {
    match model.block(id) {
        Some(BlockLaw::Spare(s)) => Ok(s),
        Some(BlockLaw::Basic(_)) => Err(Error::model(format!(
            "block `{id}` used as a spare but is not declared as one"
        ))),
        None => Err(Error::model(format!("unknown spare `{id}`"))),
    }
}

fn spare_main<'m>(model: &'m DrbdModel, main: &Expr, construct: &str) -> Result<&'m Distribution> {
    match main {
        Expr::Var(id) => basic_law(model, id),
        _ => Err(Error::UnsupportedComposition(format!(
            "{construct} with a composite main part `{main}`"
        ))),
    }
}

fn rel_node(model: &DrbdModel, e: &Expr, t: f64, tol: f64) -> Result<f64> {
    let children = |xs: &[&Expr]| -> Result<Vec<f64>> {
        xs.iter().map(|x| rel_node(model, x, t, tol)).collect()
    };
    match e {
        Expr::Always => Ok(0.0),
        Expr::Never => Ok(1.0),
        Expr::Var(id) => rel_basic(basic_law(model, id)?, t),
        Expr::And(a, b) => rel_series(&children(&[a, b])?),
        Expr::Or(a, b) => rel_parallel(&children(&[a, b])?),
        Expr::NaryAnd(xs) => rel_series(&children(&xs.iter().collect::<Vec<_>>())?),
        Expr::NaryOr(xs) => rel_parallel(&children(&xs.iter().collect::<Vec<_>>())?),
        Expr::After(..) | Expr::Simult(..) | Expr::InclAfter(..) => {
            Err(Error::UnsupportedComposition(format!(
                "temporal operator outside a spare construct in `{e}`"
            )))
        }
        Expr::Wsp(main, s) => rel_wsp(spare_main(model, main, "warm spare")?, spare_law(model, s)?, t, tol),
        Expr::Csp(main, s) => {
            rel_csp(spare_main(model, main, "cold spare")?, &spare_law(model, s)?.active, t, tol)
        }
        Expr::Hsp(main, s) => rel_hsp(rel_node(model, main, t, tol)?, &spare_law(model, s)?.active, t),
    }
}
