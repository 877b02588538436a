//! Asymptotic power, relative efficiency and the moment estimates they need.
//!
//! With `ε` the standardized noise of an elliptical law:
//!
//! ```text
//! ARE(SS, CQ) = (E||ε||⁻¹)² E||ε||²
//! ARE(SR, CQ) = 2 (E||ε₁ + ε₂||⁻¹)² E||ε||²
//! ARE(SR, SS) = 2 (E||ε₁ + ε₂||⁻¹)² / (E||ε||⁻¹)²
//! ```
//!
//! All expectations are Monte Carlo averages over independent replications.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::core_math::{dot, norm, normalize_in_place, ScatterSpec};
use crate::error::{Error, Result};
use crate::rng::{substream, Domain};
use crate::samplers::{NoiseKind, ScenarioSpec};
use crate::stat_tests::critical_z;

pub const MIN_MOMENT_REPS: usize = 1000;
const BATCHES: usize = 20;

/// Monte Carlo moments of the noise law. `c0` uses the scenario's scatter;
/// the `ε` moments use the standardized noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    /// `E||X_i + X_j||⁻¹` under the null.
    pub c0: f64,
    /// `E||ε||²`.
    pub m2: f64,
    /// `E||ε||⁻¹`.
    pub minv: f64,
    /// `E||ε₁ + ε₂||⁻¹`.
    pub mpairinv: f64,
    pub se_c0: f64,
    pub se_m2: f64,
    pub se_minv: f64,
    pub se_mpairinv: f64,
    pub reps: usize,
    pub p: usize,
}

/// Per-replication draws kept so that derived quantities can be batched.
#[derive(Debug, Clone, Copy)]
struct MomentDraw {
    c0: f64,
    m2: f64,
    minv: f64,
    mpairinv: f64,
}

impl MomentDraw {
    fn add(self, o: Self) -> Self {
        Self { c0: self.c0 + o.c0, m2: self.m2 + o.m2, minv: self.minv + o.minv, mpairinv: self.mpairinv + o.mpairinv }
    }

    fn scale(self, s: f64) -> Self {
        Self { c0: self.c0 * s, m2: self.m2 * s, minv: self.minv * s, mpairinv: self.mpairinv * s }
    }

    const ZERO: Self = Self { c0: 0.0, m2: 0.0, minv: 0.0, mpairinv: 0.0 };
}

fn moment_draws(spec: &ScenarioSpec, reps: usize, seed: u64) -> Result<Vec<MomentDraw>> {
    if !spec.noise.is_elliptical() {
        return Err(Error::InvalidParameter(format!(
            "moment estimation needs an elliptical law, got {}",
            spec.noise.label()
        )));
    }
    if reps < MIN_MOMENT_REPS {
        return Err(Error::TooFewReplications { needed: MIN_MOMENT_REPS, got: reps });
    }
    spec.noise.validate()?;
    let factor = spec.scatter.factor()?;
    let identity = matches!(spec.scatter, ScatterSpec::Toeplitz { rho, .. } if rho == 0.0);
    let p = spec.dim();
    Ok((0..reps)
        .into_par_iter()
        .map_init(
            || (vec![0.0; p], vec![0.0; p], vec![0.0; p]),
            |(e1, e2, s), r| {
                let mut rng = substream(seed, Domain::Moments, r as u64);
                spec.noise.fill_noise(&mut rng, e1);
                spec.noise.fill_noise(&mut rng, e2);
                let (r1, r2) = (dot(e1, e1), dot(e2, e2));
                for ((o, a), b) in s.iter_mut().zip(e1.iter()).zip(e2.iter()) {
                    *o = a + b;
                }
                let pair = norm(s);
                let c0 = if identity {
                    1.0 / pair
                } else {
                    factor.apply_in_place(s);
                    1.0 / norm(s)
                };
                MomentDraw {
                    c0,
                    m2: 0.5 * (r1 + r2),
                    minv: 0.5 * (1.0 / r1.sqrt() + 1.0 / r2.sqrt()),
                    mpairinv: 1.0 / pair,
                }
            },
        )
        .collect())
}

/// Contiguous batch means; order of the input fixes the result.
fn batch_means(draws: &[MomentDraw]) -> Vec<MomentDraw> {
    let b = BATCHES.min(draws.len());
    (0..b)
        .map(|k| {
            let (lo, hi) = (k * draws.len() / b, (k + 1) * draws.len() / b);
            let sum = draws[lo..hi].iter().fold(MomentDraw::ZERO, |a, d| a.add(*d));
            sum.scale(1.0 / (hi - lo) as f64)
        })
        .collect()
}

fn batch_se(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let v: Vec<f64> = values.collect();
    let b = v.len() as f64;
    let mean = v.iter().sum::<f64>() / b;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

fn summarize(draws: &[MomentDraw], p: usize) -> MomentEstimates {
    let total = draws.iter().fold(MomentDraw::ZERO, |a, d| a.add(*d));
    let mean = total.scale(1.0 / draws.len() as f64);
    let batches = batch_means(draws);
    MomentEstimates {
        c0: mean.c0,
        m2: mean.m2,
        minv: mean.minv,
        mpairinv: mean.mpairinv,
        se_c0: batch_se(batches.iter().map(|d| d.c0)),
        se_m2: batch_se(batches.iter().map(|d| d.m2)),
        se_minv: batch_se(batches.iter().map(|d| d.minv)),
        se_mpairinv: batch_se(batches.iter().map(|d| d.mpairinv)),
        reps: draws.len(),
        p,
    }
}

/// Monte Carlo moments with batch standard errors; deterministic per seed.
pub fn estimate_moments(spec: &ScenarioSpec, reps: usize, seed: u64) -> Result<MomentEstimates> {
    Ok(summarize(&moment_draws(spec, reps, seed)?, spec.dim()))
}

fn check_power_inputs(trace_sigma2: f64, n: usize, p: usize, alpha: f64) -> Result<()> {
    if !(trace_sigma2 > 0.0) || n == 0 || p == 0 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "power needs tr > 0, n, p > 0 and alpha in (0, 1); got tr = {trace_sigma2}, n = {n}, p = {p}, alpha = {alpha}"
        )));
    }
    Ok(())
}

/// Drift of the standardized SR statistic, `2 c0² p n θᵀθ / sqrt(2 tr(Σ²))`.
pub fn sr_drift(theta_norm2: f64, trace_sigma2: f64, c0: f64, n: usize, p: usize) -> f64 {
    2.0 * c0 * c0 * p as f64 * n as f64 * theta_norm2 / (2.0 * trace_sigma2).sqrt()
}

/// Drift of the standardized CQ statistic, `n p θᵀθ / (E||ε||² sqrt(2 tr(Σ²)))`.
pub fn cq_drift(theta_norm2: f64, trace_sigma2: f64, m2: f64, n: usize, p: usize) -> f64 {
    n as f64 * p as f64 * theta_norm2 / (m2 * (2.0 * trace_sigma2).sqrt())
}

fn power_from_drift(drift: f64, alpha: f64) -> f64 {
    Normal::standard().cdf(drift - critical_z(alpha))
}

pub fn asymptotic_power_sr(theta_norm2: f64, trace_sigma2: f64, c0: f64, n: usize, p: usize, alpha: f64) -> Result<f64> {
    check_power_inputs(trace_sigma2, n, p, alpha)?;
    Ok(power_from_drift(sr_drift(theta_norm2, trace_sigma2, c0, n, p), alpha))
}

pub fn asymptotic_power_cq(theta_norm2: f64, trace_sigma2: f64, m2: f64, n: usize, p: usize, alpha: f64) -> Result<f64> {
    check_power_inputs(trace_sigma2, n, p, alpha)?;
    Ok(power_from_drift(cq_drift(theta_norm2, trace_sigma2, m2, n, p), alpha))
}

/// Relative efficiencies for one distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreRow {
    pub noise: NoiseKind,
    pub ss_cq: f64,
    pub sr_cq: f64,
    pub sr_ss: f64,
    pub se_ss_cq: f64,
    pub se_sr_cq: f64,
    pub se_sr_ss: f64,
    pub moments: MomentEstimates,
}

fn ares(m: &MomentDraw) -> (f64, f64, f64) {
    let ss_cq = m.minv * m.minv * m.m2;
    let sr_cq = 2.0 * m.mpairinv * m.mpairinv * m.m2;
    let sr_ss = 2.0 * m.mpairinv * m.mpairinv / (m.minv * m.minv);
    (ss_cq, sr_cq, sr_ss)
}

/// Plugs Monte Carlo moments of each law (identity scatter, dimension `p`)
/// into the three efficiency formulas. Standard errors come from the spread
/// of the formulas evaluated on batch means.
///
/// `E||ε||²` is taken in closed form, `p E r²`: its sample mean has infinite
/// variance for t with three degrees of freedom and converges from below
/// far too slowly to be usable.
pub fn are_table(kinds: &[NoiseKind], p: usize, reps: usize, seed: u64) -> Result<Vec<AreRow>> {
    kinds
        .iter()
        .map(|&noise| {
            let spec = ScenarioSpec::new(noise, ScatterSpec::identity(p))?;
            let draws = moment_draws(&spec, reps, seed)?;
            let m2 = p as f64 * noise.radial_second_moment().expect("moment_draws accepts only elliptical kinds");
            let draws: Vec<MomentDraw> = draws.into_iter().map(|d| MomentDraw { m2, ..d }).collect();
            let moments = summarize(&draws, p);
            let mean = MomentDraw { c0: moments.c0, m2, minv: moments.minv, mpairinv: moments.mpairinv };
            let (ss_cq, sr_cq, sr_ss) = ares(&mean);
            let per_batch: Vec<(f64, f64, f64)> = batch_means(&draws).iter().map(ares).collect();
            Ok(AreRow {
                noise,
                ss_cq,
                sr_cq,
                sr_ss,
                se_ss_cq: batch_se(per_batch.iter().map(|a| a.0)),
                se_sr_cq: batch_se(per_batch.iter().map(|a| a.1)),
                se_sr_ss: batch_se(per_batch.iter().map(|a| a.2)),
                moments,
            })
        })
        .collect()
}

/// The eight laws of the relative-efficiency table, in column order.
pub fn are_table_kinds() -> Vec<NoiseKind> {
    vec![
        NoiseKind::Mvt { df: 3 },
        NoiseKind::Mvt { df: 4 },
        NoiseKind::Mvt { df: 5 },
        NoiseKind::Mvt { df: 6 },
        NoiseKind::Mvt { df: 10 },
        NoiseKind::Normal,
        NoiseKind::MixedNormal { gamma: 0.2, tau: 3.0 },
        NoiseKind::MixedNormal { gamma: 0.05, tau: 10.0 },
    ]
}

pub const MIN_TAU_INNER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub p: usize,
    /// Mean squared norm of the inner average, biased upward by the inner
    /// Monte Carlo variance.
    pub naive: f64,
    /// Unbiased version: the inner average's squared norm with the diagonal
    /// (self inner product) terms removed.
    pub corrected: f64,
    pub se: f64,
}

/// Estimates `τ_F = E||u||²`, `u = E(U(ε - ε') | ε)`, by nested Monte Carlo.
/// Since `E(u uᵀ) = (τ_F / p) I`, the trace gives `E||u||² = τ_F`.
pub fn tau_f_check(noise: NoiseKind, ps: &[usize], outer: usize, inner: usize, seed: u64) -> Result<Vec<TauEstimate>> {
    if inner < MIN_TAU_INNER {
        return Err(Error::TooFewReplications { needed: MIN_TAU_INNER, got: inner });
    }
    if outer < 2 {
        return Err(Error::TooFewReplications { needed: 2, got: outer });
    }
    if !noise.is_elliptical() {
        return Err(Error::InvalidParameter(format!("tau check needs an elliptical law, got {}", noise.label())));
    }
    noise.validate()?;
    ps.iter()
        .map(|&p| {
            let per_outer: Vec<(f64, f64)> = (0..outer)
                .into_par_iter()
                .map_init(
                    || (vec![0.0; p], vec![0.0; p], vec![0.0; p]),
                    |(ei, ej, acc), r| {
                        let mut rng = substream(seed ^ p as u64, Domain::TauF, r as u64);
                        noise.fill_noise(&mut rng, ei);
                        acc.iter_mut().for_each(|v| *v = 0.0);
                        let mut self_terms = 0.0;
                        for _ in 0..inner {
                            noise.fill_noise(&mut rng, ej);
                            for (d, a) in ej.iter_mut().zip(ei.iter()) {
                                *d = a - *d;
                            }
                            normalize_in_place(ej);
                            self_terms += dot(ej, ej);
                            acc.iter_mut().zip(ej.iter()).for_each(|(s, u)| *s += u);
                        }
                        let m = inner as f64;
                        let total = dot(acc, acc);
                        (total / (m * m), (total - self_terms) / (m * (m - 1.0)))
                    },
                )
                .collect();
            let k = outer as f64;
            let naive = per_outer.iter().map(|v| v.0).sum::<f64>() / k;
            let corrected = per_outer.iter().map(|v| v.1).sum::<f64>() / k;
            let var = per_outer.iter().map(|v| (v.1 - corrected).powi(2)).sum::<f64>() / (k - 1.0);
            Ok(TauEstimate { p, naive, corrected, se: (var / k).sqrt() })
        })
        .collect()
}
