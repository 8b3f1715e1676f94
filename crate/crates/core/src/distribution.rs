//! Failure-time laws of basic blocks and spares.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied failure-time law.
///
/// `sampler` maps a uniform draw `u ∈ (0, 1)` to a failure time, usually the
/// quantile function. Keeping sampling a pure function of `u` keeps Monte
/// Carlo runs reproducible from the seed alone.
#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    pub cdf: Arc<RealFn>,
    pub pdf: Arc<RealFn>,
    pub sampler: Arc<RealFn>,
}

/// Failure-time distribution supported on `[0, ∞)`.
#[derive(Clone)]
pub enum Distribution {
    /// `F(t) = 1 - exp(-rate t)`.
    Exponential { rate: f64 },
    /// `F(t) = 1 - exp(-(t/scale)^shape)`.
    Weibull { shape: f64, scale: f64 },
    Custom(CustomLaw),
}

impl Distribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Distribution::Exponential { rate })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "weibull shape and scale must be positive, got ({shape}, {scale})"
            )));
        }
        Ok(Distribution::Weibull { shape, scale })
    }

    pub fn custom<C, P, S>(name: impl Into<String>, cdf: C, pdf: P, sampler: S) -> Self
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Distribution::Custom(CustomLaw {
            name: name.into(),
            cdf: Arc::new(cdf),
            pdf: Arc::new(pdf),
            sampler: Arc::new(sampler),
        })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return match self {
                Distribution::Custom(law) => (law.cdf)(t.max(0.0)),
                _ => 0.0,
            };
        }
        match *self {
            Distribution::Exponential { rate } => -(-rate * t).exp_m1(),
            Distribution::Weibull { shape, scale } => -(-(t / scale).powf(shape)).exp_m1(),
            Distribution::Custom(ref law) => (law.cdf)(t),
        }
    }

    /// `1 - F(t)`, computed without cancellation for the built-in laws.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0 - self.cdf(t);
        }
        match *self {
            Distribution::Exponential { rate } => (-rate * t).exp(),
            Distribution::Weibull { shape, scale } => (-(t / scale).powf(shape)).exp(),
            Distribution::Custom(ref law) => 1.0 - (law.cdf)(t),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Distribution::Exponential { rate } => rate * (-rate * t).exp(),
            Distribution::Weibull { shape, scale } => {
                if t == 0.0 {
                    return match shape {
                        k if k < 1.0 => f64::INFINITY,
                        k if k == 1.0 => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                let z = t / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
            Distribution::Custom(ref law) => (law.pdf)(t),
        }
    }

    /// Failure time for the uniform draw `u ∈ (0, 1)`, by inverse CDF.
    pub fn sample(&self, u: f64) -> f64 {
        match *self {
            // -ln(u) is Exp(1) whenever u is uniform on (0, 1)
            Distribution::Exponential { rate } => -u.ln() / rate,
            Distribution::Weibull { shape, scale } => scale * (-u.ln()).powf(1.0 / shape),
            Distribution::Custom(ref law) => (law.sampler)(u),
        }
    }

    /// The law whose cumulative hazard is `factor` times this one's.
    ///
    /// This is how a dormancy factor attenuates a spare: an exponential
    /// rate `λ` becomes `factor·λ`. A zero factor yields `None`, a law that
    /// never fails.
    pub fn attenuated(&self, factor: f64) -> Result<Option<Distribution>> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(Error::domain(format!("dormancy factor must lie in [0, 1], got {factor}")));
        }
        if factor == 0.0 {
            return Ok(None);
        }
        if factor == 1.0 {
            return Ok(Some(self.clone()));
        }
        Ok(Some(match *self {
            Distribution::Exponential { rate } => Distribution::exponential(rate * factor)?,
            Distribution::Weibull { shape, scale } => {
                Distribution::weibull(shape, scale * factor.powf(-1.0 / shape))?
            }
            Distribution::Custom(ref law) => {
                let (cdf, pdf, sampler) = (law.cdf.clone(), law.pdf.clone(), law.sampler.clone());
                let cdf2 = cdf.clone();
                Distribution::custom(
                    format!("{}^{factor}", law.name),
                    move |t| 1.0 - (1.0 - cdf(t)).powf(factor),
                    move |t| factor * (1.0 - cdf2(t)).powf(factor - 1.0) * pdf(t),
                    // S_new(t) = S(t)^factor, so a draw u for S_new maps to u^(1/factor) for S
                    move |u| sampler(1.0 - (1.0 - u).powf(1.0 / factor)),
                )
            }
        }))
    }
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Distribution::Exponential { rate: a }, Distribution::Exponential { rate: b }) => a == b,
            (
                Distribution::Weibull { shape: k1, scale: s1 },
                Distribution::Weibull { shape: k2, scale: s2 },
            ) => k1 == k2 && s1 == s2,
            (Distribution::Custom(a), Distribution::Custom(b)) => {
                Arc::ptr_eq(&a.cdf, &b.cdf) && Arc::ptr_eq(&a.sampler, &b.sampler)
            }
            _ => false,
        }
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Exponential { rate } => write!(f, "exp({rate})"),
            Distribution::Weibull { shape, scale } => write!(f, "weibull({shape}, {scale})"),
            Distribution::Custom(law) => write!(f, "custom({})", law.name),
        }
    }
}

/// Active and dormant laws of a spare.
#[derive(Clone, Debug, PartialEq)]
pub struct SpareSpec {
    pub active: Distribution,
    /// `None` when the spare cannot fail while dormant (cold spare).
    pub dormant: Option<Distribution>,
}

impl SpareSpec {
    pub fn new(active: Distribution, dormant: Option<Distribution>) -> Self {
        SpareSpec { active, dormant }
    }

    /// Dormant law obtained by attenuating the active law's hazard by
    /// `dormancy` (0 = cold, 1 = hot).
    pub fn with_dormancy(active: Distribution, dormancy: f64) -> Result<Self> {
        let dormant = active.attenuated(dormancy)?;
        Ok(SpareSpec { active, dormant })
    }

    /// Exponential spare with active rate `rate` and dormant rate
    /// `dormancy · rate`.
    pub fn exponential(rate: f64, dormancy: f64) -> Result<Self> {
        Self::with_dormancy(Distribution::exponential(rate)?, dormancy)
    }

    pub fn dormant_cdf(&self, t: f64) -> f64 {
        self.dormant.as_ref().map_or(0.0, |d| d.cdf(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_closed_forms() {
        let d = Distribution::exponential(0.1).unwrap();
        assert_eq!(d.cdf(0.0), 0.0);
        assert!((d.survival(1.0) - (-0.1f64).exp()).abs() < 1e-15);
        assert!((d.cdf(1.0) + d.survival(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(d.sample(1.0f64.exp().recip()), 10.0);
    }

    #[test]
    fn weibull_shape_one_is_exponential() {
        let w = Distribution::weibull(1.0, 10.0).unwrap();
        let e = Distribution::exponential(0.1).unwrap();
        for t in [0.0, 0.3, 1.0, 7.0, 40.0] {
            assert!((w.cdf(t) - e.cdf(t)).abs() < 1e-15);
            assert!((w.pdf(t) - e.pdf(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let laws = [
            Distribution::exponential(0.7).unwrap(),
            Distribution::weibull(2.0, 1.5).unwrap(),
            Distribution::weibull(0.6, 3.0).unwrap(),
        ];
        for d in &laws {
            for t in [0.2, 0.9, 2.5] {
                let h = 1e-5;
                let fd = (d.cdf(t + h) - d.cdf(t - h)) / (2.0 * h);
                assert!((fd - d.pdf(t)).abs() < 1e-7, "{d:?} at {t}: {fd} vs {}", d.pdf(t));
            }
        }
    }

    #[test]
    fn sampler_inverts_cdf() {
        let d = Distribution::weibull(2.0, 3.0).unwrap();
        for u in [0.01, 0.3, 0.5, 0.99] {
            let x = d.sample(u);
            // survival at the sampled time equals the draw
            assert!((d.survival(x) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn dormancy_attenuates_hazard() {
        let s = SpareSpec::exponential(2.0, 0.25).unwrap();
        assert_eq!(s.dormant, Some(Distribution::exponential(0.5).unwrap()));
        let cold = SpareSpec::exponential(2.0, 0.0).unwrap();
        assert!(cold.dormant.is_none());
        assert_eq!(cold.dormant_cdf(100.0), 0.0);
        let hot = SpareSpec::exponential(2.0, 1.0).unwrap();
        assert_eq!(hot.dormant.as_ref(), Some(&hot.active));
        assert!(SpareSpec::exponential(1.0, 1.5).is_err());

        let w = Distribution::weibull(2.0, 1.0).unwrap();
        let wd = w.attenuated(0.5).unwrap().unwrap();
        for t in [0.5, 1.0, 2.0] {
            assert!((wd.survival(t) - w.survival(t).powf(0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Distribution::exponential(0.0).is_err());
        assert!(Distribution::exponential(f64::NAN).is_err());
        assert!(Distribution::weibull(-1.0, 1.0).is_err());
    }
}
