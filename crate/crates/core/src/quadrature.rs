//! Adaptive composite Simpson quadrature.

use crate::error::{Error, Result};

/// Deepest bisection level before giving up on an interval.
pub const MAX_DEPTH: u32 = 50;

/// Panels are always bisected this many times: on a single coarse panel the
/// two Simpson estimates can agree by accident while both are off.
const MIN_DEPTH: u32 = 4;

/// Value of a definite integral together with the summed local error
/// estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each panel is bisected until the Richardson estimate `|S₂ - S₁| / 15`
/// falls below its share of `tol`. A panel that still fails at
/// [`MAX_DEPTH`] is a numeric error reporting the error reached so far.
pub fn quadrature<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("invalid integration interval [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let root = Panel { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb) };

    let mut value = 0.0;
    let mut error = 0.0;
    let mut failed = false;
    // explicit stack instead of recursion; (panel, tolerance share, depth)
    let mut stack = vec![(root, tol, 0u32)];
    while let Some((p, eps, depth)) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let local = delta.abs() / 15.0;
        if !local.is_finite() {
            return Err(Error::Numeric {
                message: format!("integrand is not finite near {m}"),
                estimate: f64::INFINITY,
            });
        }
        // below the rounding floor of the panel further bisection cannot help
        let floor = 16.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth >= MIN_DEPTH && (local <= eps || delta.abs() <= floor) {
            value += left + right + delta / 15.0;
            error += local;
        } else if depth >= MAX_DEPTH || m <= p.a || m >= p.b {
            value += left + right + delta / 15.0;
            error += local;
            failed = true;
        } else {
            stack.push((Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, eps / 2.0, depth + 1));
            stack.push((Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, eps / 2.0, depth + 1));
        }
    }

    if failed && error > tol {
        return Err(Error::Numeric {
            message: format!("adaptive Simpson on [{a}, {b}] exceeded depth {MAX_DEPTH}"),
            estimate: error,
        });
    }
    Ok(Integral { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand() {
        let r = quadrature(|_| 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_closed_form() {
        let tol = 1e-9;
        let r = quadrature(|x: f64| (-x).exp(), 0.0, 1.0, tol).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((r.value - exact).abs() < 10.0 * tol);
        assert!((r.value - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn coarse_agreement_does_not_stop_refinement() {
        // the two Simpson estimates over the whole interval agree to ~1e-10
        // although both are off by ~2e-8
        let (mu, lam, t) = (0.3936533824308132, 1.2717687775777593, 6.767210008817169);
        let f = |y: f64| mu * (-mu * y).exp() * (1.0 - (-lam * (t - y)).exp());
        let exact = -(-mu * t).exp_m1() - mu * (-lam * t).exp() * ((lam - mu) * t).exp_m1() / (lam - mu);
        let r = quadrature(f, 0.0, t, 1e-9).unwrap();
        assert!((r.value - exact).abs() < 1e-9, "{}", r.value - exact);
    }

    #[test]
    fn degenerate_interval_is_zero() {
        let r = quadrature(|x: f64| x.sin(), 2.0, 2.0, 1e-9).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(quadrature(|x| x, 1.0, 0.0, 1e-9).is_err());
        assert!(quadrature(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn non_finite_integrand_is_numeric_error() {
        let r = quadrature(|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, 1e-9);
        assert!(matches!(r, Err(Error::Numeric { .. })));
    }

    #[test]
    fn wide_interval_smooth_integrand() {
        // ∫₀^2e5 λe^{-λx} dx with λ = 1e-5
        let lam = 1e-5;
        let r = quadrature(|x: f64| lam * (-lam * x).exp(), 0.0, 2e5, 1e-9).unwrap();
        assert!((r.value - (1.0 - (-2.0f64).exp())).abs() < 1e-8);
    }
}
