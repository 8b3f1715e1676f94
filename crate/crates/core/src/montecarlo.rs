//! Monte Carlo oracle: sample block failure times, evaluate the structure
//! function exactly, and estimate `Rel(t)` with a confidence interval.
//!
//! Sample `i` draws from its own ChaCha8 stream (stream number `i` under the
//! root seed), consuming two words per block in block-id order. Any
//! partition of the sample indices across workers therefore sees the same
//! draws, and tallies are integer counts, so results are bit-identical for
//! every worker count.

use std::thread;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::expr::{Sample, SampleValue};
use crate::model::{BlockLaw, DrbdModel};
use crate::reliability::{rel_expr, DEFAULT_TOL};
use crate::time::ExtTime;

/// Two-sided confidence level of the reported interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CiLevel {
    P95,
    P99,
}

impl CiLevel {
    /// Standard normal quantile `z` with `P(|Z| ≤ z)` equal to the level.
    pub fn z(self) -> f64 {
        match self {
            CiLevel::P95 => 1.959_963_984_540_054,
            CiLevel::P99 => 2.575_829_303_548_900_4,
        }
    }

    pub fn level(self) -> f64 {
        match self {
            CiLevel::P95 => 0.95,
            CiLevel::P99 => 0.99,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub ci: CiLevel,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 100_000, seed: 0, ci: CiLevel::P99, workers: 1 }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed, ..Default::default() }
    }

    pub fn with_ci(self, ci: CiLevel) -> Self {
        McConfig { ci, ..self }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        McConfig { workers, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::domain("sample count must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::domain("worker count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub rel_hat: f64,
    pub half_width: f64,
    pub n_effective: u64,
}

impl McEstimate {
    /// Binomial estimate from `survived` successes out of `n`.
    ///
    /// The half-width is the normal approximation, except within `10/n` of
    /// 0 or 1 where the Wilson interval replaces it so the interval never
    /// collapses to zero width.
    pub fn from_counts(survived: u64, n: u64, ci: CiLevel) -> Self {
        let nf = n as f64;
        let p = survived as f64 / nf;
        let z = ci.z();
        let half_width = if survived < 10 || n - survived < 10 {
            let z2 = z * z;
            z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt()
        } else {
            z * (p * (1.0 - p) / nf).sqrt()
        };
        McEstimate { rel_hat: p, half_width, n_effective: n }
    }

    /// Standard error implied by the half-width at level `ci`.
    pub fn sigma(&self, ci: CiLevel) -> f64 {
        self.half_width / ci.z()
    }
}

/// Counter-based random stream of one sample index.
pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, sample_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample_index);
        SampleStream { rng }
    }

    fn reposition(&mut self, sample_index: u64) {
        self.rng.set_stream(sample_index);
        self.rng.set_word_pos(0);
    }

    /// Uniform draw on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

fn draw_time(block: &str, law: &Distribution, u: f64) -> Result<f64> {
    let x = law.sample(u);
    if x.is_nan() || x < 0.0 {
        return Err(Error::Sampling {
            block: block.to_string(),
            message: format!("sampler returned {x}"),
        });
    }
    Ok(x)
}

fn draw_into(model: &DrbdModel, stream: &mut SampleStream, out: &mut Vec<SampleValue>) -> Result<()> {
    out.clear();
    for (id, law) in model.blocks() {
        // always two draws per block so that block k's draws sit at a fixed
        // position of the sample's stream
        let (u1, u2) = (stream.uniform(), stream.uniform());
        out.push(match law {
            BlockLaw::Basic(d) => SampleValue::Basic(time_of(draw_time(id, d, u1)?)),
            BlockLaw::Spare(spec) => {
                let dormant = match &spec.dormant {
                    Some(d) => time_of(draw_time(id, d, u1)?),
                    None => ExtTime::INF,
                };
                let active_offset = draw_time(id, &spec.active, u2)?;
                if active_offset.is_infinite() {
                    return Err(Error::Sampling {
                        block: id.clone(),
                        message: "active lifetime must be finite".into(),
                    });
                }
                SampleValue::Spare { dormant, active_offset }
            }
        });
    }
    Ok(())
}

// draw_time has already rejected NaN and negative values
fn time_of(x: f64) -> ExtTime {
    ExtTime::from_f64(x).unwrap_or(ExtTime::INF)
}

/// One draw of every block of `model`.
pub fn draw_sample(model: &DrbdModel, stream: &mut SampleStream) -> Result<Sample> {
    let mut values = Vec::with_capacity(model.blocks().len());
    draw_into(model, stream, &mut values)?;
    Sample::new(model.index().clone(), values)
}

/// Sample `index` of the run seeded with `seed`.
pub fn sample_at(model: &DrbdModel, seed: u64, index: u64) -> Result<Sample> {
    draw_sample(model, &mut SampleStream::new(seed, index))
}

/// Calls `visit(i, sample)` for sample indices `range`, in order.
pub(crate) fn for_each_sample(
    model: &DrbdModel,
    seed: u64,
    range: std::ops::Range<u64>,
    visit: &mut dyn FnMut(u64, &[SampleValue]) -> Result<bool>,
) -> Result<()> {
    let mut stream = SampleStream::new(seed, range.start);
    let mut values = Vec::with_capacity(model.blocks().len());
    for i in range {
        stream.reposition(i);
        draw_into(model, &mut stream, &mut values)?;
        if !visit(i, &values)? {
            break;
        }
    }
    Ok(())
}

/// Survivor counts at each of `times`, over `cfg.samples` samples.
fn survivor_counts(model: &DrbdModel, times: &[f64], cfg: &McConfig) -> Result<Vec<u64>> {
    cfg.check()?;
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::domain(format!("mission time must be nonnegative, got {t}")));
    }
    let root = model.compile(model.root())?;
    let n = cfg.samples;
    let workers = (cfg.workers as u64).min(n).max(1);
    let chunk = n.div_ceil(workers);

    let run = |range: std::ops::Range<u64>| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; times.len()];
        for_each_sample(model, cfg.seed, range, &mut |_, values| {
            let failure = root.eval(values);
            for (c, &t) in counts.iter_mut().zip(times) {
                *c += failure.survives(t) as u64;
            }
            Ok(true)
        })?;
        Ok(counts)
    };

    let partials: Vec<Result<Vec<u64>>> = if workers == 1 {
        vec![run(0..n)]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let range = (w * chunk).min(n)..((w + 1) * chunk).min(n);
                    let run = &run;
                    scope.spawn(move || run(range))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("Monte Carlo worker panicked"))
                .collect()
        })
    };

    // chunks are in index order, so the first error is the lowest-index one
    let mut total = vec![0u64; times.len()];
    for part in partials {
        for (acc, c) in total.iter_mut().zip(part?) {
            *acc += c;
        }
    }
    Ok(total)
}

/// Estimate of `Rel(t)`: the fraction of samples whose structure function
/// exceeds `t`.
pub fn estimate_rel(model: &DrbdModel, t: f64, cfg: &McConfig) -> Result<McEstimate> {
    let counts = survivor_counts(model, &[t], cfg)?;
    Ok(McEstimate::from_counts(counts[0], cfg.samples, cfg.ci))
}

/// Estimates at every time of a grid, reusing the same samples.
pub fn estimate_curve(model: &DrbdModel, times: &[f64], cfg: &McConfig) -> Result<Vec<McEstimate>> {
    let counts = survivor_counts(model, times, cfg)?;
    Ok(counts
        .into_iter()
        .map(|c| McEstimate::from_counts(c, cfg.samples, cfg.ci))
        .collect())
}

/// Outcome of checking an algebraic value against the oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Consistent { algebraic: f64, mc: McEstimate, z_score: f64 },
    Discrepancy { algebraic: f64, mc: McEstimate, z_score: f64 },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent { .. })
    }

    pub fn z_score(&self) -> f64 {
        match *self {
            Verdict::Consistent { z_score, .. } | Verdict::Discrepancy { z_score, .. } => z_score,
        }
    }
}

/// Consistent iff `|algebraic - rel_hat| ≤ tol_sigmas · σ̂`.
pub fn judge(algebraic: f64, mc: McEstimate, ci: CiLevel, tol_sigmas: f64) -> Verdict {
    let diff = algebraic - mc.rel_hat;
    let sigma = mc.sigma(ci);
    let z_score = if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    if z_score.abs() <= tol_sigmas {
        Verdict::Consistent { algebraic, mc, z_score }
    } else {
        Verdict::Discrepancy { algebraic, mc, z_score }
    }
}

/// Checks [`rel_expr`] against [`estimate_rel`] at `t`.
pub fn compare(model: &DrbdModel, t: f64, tol_sigmas: f64, cfg: &McConfig) -> Result<Verdict> {
    let algebraic = rel_expr(model, t, DEFAULT_TOL)?;
    let mc = estimate_rel(model, t, cfg)?;
    Ok(judge(algebraic, mc, cfg.ci, tol_sigmas))
}
