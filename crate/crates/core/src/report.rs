//! Time grids and CSV rendering of reliability curves.
//!
//! Numbers are printed with 9 significant digits in the style of C's `%.9g`
//! so that output is byte-stable across runs and platforms.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::DrbdModel;
use crate::montecarlo::{estimate_curve, judge, McConfig, Verdict};
use crate::reliability::rel_curve;

/// `x` with `digits` significant digits, trailing zeros removed; exponent
/// notation outside `[1e-4, 10^digits)`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g9(x: f64) -> String {
    format_sig(x, 9)
}

/// `steps + 1` equally spaced times from `t0` to `t1` inclusive.
pub fn grid(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t0 >= 0.0) || !t0.is_finite() {
        return Err(Error::domain(format!("grid start must be a nonnegative time, got {t0}")));
    }
    if !(t1 > t0) || !t1.is_finite() {
        return Err(Error::domain(format!("grid end must exceed the start ({t0}), got {t1}")));
    }
    if steps == 0 {
        return Err(Error::domain("grid needs at least one step"));
    }
    Ok((0..=steps)
        .map(|i| if i == steps { t1 } else { t0 + (t1 - t0) * i as f64 / steps as f64 })
        .collect())
}

/// `t,rel` rows of the algebraic curve.
pub fn rel_csv(model: &DrbdModel, times: &[f64], tol: f64) -> Result<String> {
    let rels = rel_curve(model, times, tol)?;
    let mut out = String::from("t,rel\n");
    for (t, r) in times.iter().zip(rels) {
        let _ = writeln!(out, "{},{}", g9(*t), g9(r));
    }
    Ok(out)
}

/// `t,mc_rel,mc_halfwidth` rows of the Monte Carlo estimate.
pub fn simulate_csv(model: &DrbdModel, times: &[f64], cfg: &McConfig) -> Result<String> {
    let est = estimate_curve(model, times, cfg)?;
    let mut out = String::from("t,mc_rel,mc_halfwidth\n");
    for (t, e) in times.iter().zip(est) {
        let _ = writeln!(out, "{},{},{}", g9(*t), g9(e.rel_hat), g9(e.half_width));
    }
    Ok(out)
}

/// Algebraic curve next to the Monte Carlo estimate, one verdict per time.
pub fn compare_curve(
    model: &DrbdModel,
    times: &[f64],
    tol: f64,
    tol_sigmas: f64,
    cfg: &McConfig,
) -> Result<Vec<(f64, Verdict)>> {
    let rels = rel_curve(model, times, tol)?;
    let est = estimate_curve(model, times, cfg)?;
    Ok(times
        .iter()
        .zip(rels.into_iter().zip(est))
        .map(|(&t, (r, e))| (t, judge(r, e, cfg.ci, tol_sigmas)))
        .collect())
}

/// `t,rel,mc_rel,mc_halfwidth,z,verdict` rows.
pub fn compare_csv(rows: &[(f64, Verdict)]) -> String {
    let mut out = String::from("t,rel,mc_rel,mc_halfwidth,z,verdict\n");
    for (t, v) in rows {
        let (Verdict::Consistent { algebraic, mc, z_score } | Verdict::Discrepancy { algebraic, mc, z_score }) = *v;
        let verdict = if v.is_consistent() { "consistent" } else { "discrepancy" };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{verdict}",
            g9(*t),
            g9(algebraic),
            g9(mc.rel_hat),
            g9(mc.half_width),
            format_sig(z_score, 4)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(g9(1.0), "1");
        assert_eq!(g9(0.0), "0");
        assert_eq!(g9((-0.3f64).exp()), "0.740818221");
        assert_eq!(g9(200000.0), "200000");
        assert_eq!(g9(1e-5), "1e-05");
        assert_eq!(g9(0.000123456789012), "0.000123456789");
        assert_eq!(g9(1234567890.0), "1.23456789e+09");
        assert_eq!(g9(0.5), "0.5");
        assert_eq!(g9(0.9999999999), "1");
    }

    #[test]
    fn grid_has_endpoints() {
        let g = grid(0.0, 1.0, 4).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(grid(1.0, 1.0, 4).is_err());
        assert!(grid(-1.0, 1.0, 4).is_err());
        assert!(grid(0.0, 1.0, 0).is_err());
    }
}
