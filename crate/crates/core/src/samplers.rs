//! Generators for the simulation scenarios and the calibrated mean vectors.
//!
//! Every row is `theta + L z` where `L` is the scatter factor and `z` is the
//! scenario's standardized noise:
//!
//! | kind            | noise `z`                                        |
//! |-----------------|--------------------------------------------------|
//! | `Normal`        | `g`, standard normal                              |
//! | `Mvt(df)`       | `g / sqrt(w / df)`, one chi-square `w` per row    |
//! | `MixedNormal`   | `s g`, `s = tau` w.p. `gamma`, else 1, per row    |
//! | `FactorT(df)`   | i.i.d. univariate `t(df)` entries                 |
//! | `FactorMixed`   | i.i.d. entries `s_k g_k`, one `s_k` per entry     |
//!
//! The first three are elliptical; the factor models are not.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::core_math::{Matrix, SampleMatrix, ScatterFactor, ScatterSpec};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    Normal,
    Mvt { df: u32 },
    MixedNormal { gamma: f64, tau: f64 },
    FactorT { df: u32 },
    FactorMixed { gamma: f64, tau: f64 },
}

impl NoiseKind {
    /// The five simulation scenarios, numbered I to V.
    pub fn scenario(number: u8) -> Result<Self> {
        Ok(match number {
            1 => Self::Normal,
            2 => Self::Mvt { df: 4 },
            3 => Self::MixedNormal { gamma: 0.2, tau: 3.0 },
            4 => Self::FactorT { df: 4 },
            5 => Self::FactorMixed { gamma: 0.2, tau: 3.0 },
            _ => return Err(Error::InvalidParameter(format!("no scenario {number}; expected 1..=5"))),
        })
    }

    pub fn is_elliptical(&self) -> bool {
        matches!(self, Self::Normal | Self::Mvt { .. } | Self::MixedNormal { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal => Ok(()),
            Self::Mvt { df } | Self::FactorT { df } => {
                if df <= 2 {
                    Err(Error::InvalidParameter(format!(
                        "t degrees of freedom must exceed 2 for finite variance, got {df}"
                    )))
                } else {
                    Ok(())
                }
            }
            Self::MixedNormal { gamma, tau } | Self::FactorMixed { gamma, tau } => {
                if !(0.0..1.0).contains(&gamma) || !(tau > 0.0) || !tau.is_finite() {
                    Err(Error::InvalidParameter(format!(
                        "mixture needs gamma in [0, 1) and tau > 0, got gamma = {gamma}, tau = {tau}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// `kappa` with covariance `Λ = kappa Σ`.
    pub fn covariance_factor(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Self::Normal => 1.0,
            Self::Mvt { df } | Self::FactorT { df } => {
                let nu = f64::from(df);
                nu / (nu - 2.0)
            }
            Self::MixedNormal { gamma, tau } | Self::FactorMixed { gamma, tau } => {
                (1.0 - gamma) + gamma * tau * tau
            }
        })
    }

    /// Short label used in tables, e.g. `t4` or `MN(0.2,3)`.
    pub fn label(&self) -> String {
        match *self {
            Self::Normal => "N".into(),
            Self::Mvt { df } => format!("t{df}"),
            Self::MixedNormal { gamma, tau } => format!("MN({gamma},{tau})"),
            Self::FactorT { df } => format!("factor-t{df}"),
            Self::FactorMixed { gamma, tau } => format!("factor-MN({gamma},{tau})"),
        }
    }

    /// Fills `z` with one standardized noise vector (before the scatter
    /// factor is applied).
    pub fn fill_noise(&self, rng: &mut StreamRng, z: &mut [f64]) {
        match *self {
            Self::Normal => fill_gaussian(rng, z),
            Self::Mvt { df } => {
                fill_gaussian(rng, z);
                let nu = f64::from(df);
                let w: f64 = ChiSquared::new(nu).expect("validated df").sample(rng);
                let s = (nu / w).sqrt();
                z.iter_mut().for_each(|v| *v *= s);
            }
            Self::MixedNormal { gamma, tau } => {
                fill_gaussian(rng, z);
                if mixture_hit(rng, gamma) {
                    z.iter_mut().for_each(|v| *v *= tau);
                }
            }
            Self::FactorT { df } => {
                let t = StudentT::new(f64::from(df)).expect("validated df");
                z.iter_mut().for_each(|v| *v = t.sample(rng));
            }
            Self::FactorMixed { gamma, tau } => {
                for v in z.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *v = if mixture_hit(rng, gamma) { tau * g } else { g };
                }
            }
        }
    }

    /// `E r²` for the radial multiplier of [`radial_draw`](Self::radial_draw),
    /// so that `E||z||² = p E r²`. `None` for the factor models.
    pub fn radial_second_moment(&self) -> Option<f64> {
        match *self {
            Self::Normal => Some(1.0),
            Self::Mvt { df } => Some(f64::from(df) / (f64::from(df) - 2.0)),
            Self::MixedNormal { gamma, tau } => Some(1.0 - gamma + gamma * tau * tau),
            Self::FactorT { .. } | Self::FactorMixed { .. } => None,
        }
    }

    /// Radial multiplier of an elliptical kind: `z = r g` with `g` standard
    /// normal and `r` independent of `g`. `None` for the factor models.
    pub fn radial_draw(&self, rng: &mut StreamRng) -> Option<f64> {
        match *self {
            Self::Normal => Some(1.0),
            Self::Mvt { df } => {
                let nu = f64::from(df);
                let w: f64 = ChiSquared::new(nu).expect("validated df").sample(rng);
                Some((nu / w).sqrt())
            }
            Self::MixedNormal { gamma, tau } => Some(if mixture_hit(rng, gamma) { tau } else { 1.0 }),
            Self::FactorT { .. } | Self::FactorMixed { .. } => None,
        }
    }
}

// No uniform is consumed when gamma = 0, so a degenerate mixture replays
// the Gaussian stream exactly.
fn mixture_hit(rng: &mut StreamRng, gamma: f64) -> bool {
    gamma > 0.0 && rng.random::<f64>() < gamma
}

fn fill_gaussian(rng: &mut StreamRng, z: &mut [f64]) {
    z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
}

/// A generative model: noise law plus scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub noise: NoiseKind,
    pub scatter: ScatterSpec,
}

impl ScenarioSpec {
    pub fn new(noise: NoiseKind, scatter: ScatterSpec) -> Result<Self> {
        noise.validate()?;
        Ok(Self { noise, scatter })
    }

    /// Scenario I..V with the `0.5^|i-j|` scatter in dimension `p`.
    pub fn numbered(number: u8, p: usize) -> Result<Self> {
        Self::new(NoiseKind::scenario(number)?, ScatterSpec::toeplitz(0.5, p)?)
    }

    pub fn dim(&self) -> usize {
        self.scatter.dim()
    }

    pub fn covariance_factor(&self) -> Result<f64> {
        self.noise.covariance_factor()
    }

    /// `tr(Λ²) = kappa² tr(Σ²)`.
    pub fn covariance_trace_squared(&self) -> Result<f64> {
        let k = self.covariance_factor()?;
        Ok(k * k * self.scatter.trace_squared())
    }
}

/// Which components of the mean vector carry signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    Null,
    /// First `ceil(p / 2)` components zero.
    Dense,
    /// First `ceil(0.95 p)` components zero.
    Sparse,
}

impl Allocation {
    pub fn zero_count(&self, p: usize) -> usize {
        match self {
            Self::Null => p,
            Self::Dense => p.div_ceil(2),
            // ceil(0.95 p) = ceil(19 p / 20), in integers.
            Self::Sparse => (19 * p).div_ceil(20),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Null => "size",
            Self::Dense => "dense",
            Self::Sparse => "sparse",
        }
    }
}

impl std::str::FromStr for Allocation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "null" | "size" => Ok(Self::Null),
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            _ => Err(Error::InvalidParameter(format!("unknown allocation {s:?}"))),
        }
    }
}

/// Mean vector specification: `theta' theta / sqrt(tr(Λ²)) = signal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSpec {
    pub allocation: Allocation,
    pub signal: f64,
    pub p: usize,
}

impl MeanSpec {
    pub fn null(p: usize) -> Self {
        Self { allocation: Allocation::Null, signal: 0.0, p }
    }

    pub fn new(allocation: Allocation, signal: f64, p: usize) -> Result<Self> {
        if !(signal >= 0.0) || !signal.is_finite() {
            return Err(Error::InvalidParameter(format!("signal must be finite and >= 0, got {signal}")));
        }
        Ok(Self { allocation, signal, p })
    }

    /// Realizes `theta` against the scenario's covariance.
    pub fn theta(&self, scenario: &ScenarioSpec) -> Result<Vec<f64>> {
        if scenario.dim() != self.p {
            return Err(Error::Dimension(format!(
                "mean has dimension {} but scenario has {}",
                self.p,
                scenario.dim()
            )));
        }
        let mut theta = vec![0.0; self.p];
        let zeros = self.allocation.zero_count(self.p);
        let active = self.p - zeros;
        if active == 0 || self.signal == 0.0 {
            return Ok(theta);
        }
        let target = self.signal * scenario.covariance_trace_squared()?.sqrt();
        let value = (target / active as f64).sqrt();
        theta[zeros..].iter_mut().for_each(|t| *t = value);
        Ok(theta)
    }
}

/// Reusable sampler: the scatter factor and mean are computed once.
#[derive(Debug, Clone)]
pub struct Sampler {
    noise: NoiseKind,
    factor: ScatterFactor,
    theta: Vec<f64>,
}

impl Sampler {
    pub fn new(spec: &ScenarioSpec, mean: &MeanSpec) -> Result<Self> {
        spec.noise.validate()?;
        Ok(Self { noise: spec.noise, factor: spec.scatter.factor()?, theta: mean.theta(spec)? })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    /// Draws `n` rows from `rng`.
    pub fn draw(&self, n: usize, rng: &mut StreamRng) -> Result<SampleMatrix> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let p = self.dim();
        let mut m = Matrix::zeros(n, p);
        for i in 0..n {
            let row = m.row_mut(i);
            self.noise.fill_noise(rng, row);
            self.factor.apply_in_place(row);
            for (v, t) in row.iter_mut().zip(&self.theta) {
                *v += t;
            }
        }
        SampleMatrix::new(m)
    }
}

/// One sample of `n` rows from a fresh stream seeded by `seed`.
pub fn sample(spec: &ScenarioSpec, mean: &MeanSpec, n: usize, seed: u64) -> Result<SampleMatrix> {
    let mut rng = crate::rng::substream(seed, crate::rng::Domain::Sample, 0);
    Sampler::new(spec, mean)?.draw(n, &mut rng)
}

/// `κ` with `Λ = κ Σ`.
pub fn covariance_factor(spec: &ScenarioSpec) -> Result<f64> {
    spec.covariance_factor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_math::{spatial_sign, Matrix};

    fn sample_covariance(x: &SampleMatrix) -> Matrix {
        let (n, p) = (x.n(), x.p());
        let mut c = Matrix::zeros(p, p);
        for i in 0..n {
            let r = x.row(i);
            for a in 0..p {
                for b in 0..p {
                    c[(a, b)] += r[a] * r[b];
                }
            }
        }
        for v in 0..p {
            for w in 0..p {
                c[(v, w)] /= n as f64;
            }
        }
        c
    }

    #[test]
    fn covariance_factors() {
        assert_eq!(NoiseKind::Normal.covariance_factor().unwrap(), 1.0);
        assert_eq!(NoiseKind::Mvt { df: 4 }.covariance_factor().unwrap(), 2.0);
        let k = NoiseKind::MixedNormal { gamma: 0.2, tau: 3.0 }.covariance_factor().unwrap();
        assert!((k - 2.6).abs() < 1e-15);
        assert_eq!(NoiseKind::FactorT { df: 4 }.covariance_factor().unwrap(), 2.0);
        assert!(matches!(
            NoiseKind::Mvt { df: 2 }.covariance_factor(),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn numbered_scenarios() {
        assert_eq!(NoiseKind::scenario(1).unwrap(), NoiseKind::Normal);
        assert_eq!(NoiseKind::scenario(2).unwrap(), NoiseKind::Mvt { df: 4 });
        assert_eq!(NoiseKind::scenario(5).unwrap(), NoiseKind::FactorMixed { gamma: 0.2, tau: 3.0 });
        assert!(NoiseKind::scenario(6).is_err());
    }

    #[test]
    fn zero_counts() {
        assert_eq!(Allocation::Dense.zero_count(100), 50);
        assert_eq!(Allocation::Dense.zero_count(25), 13);
        assert_eq!(Allocation::Sparse.zero_count(100), 95);
        assert_eq!(Allocation::Sparse.zero_count(24), 23);
        assert_eq!(Allocation::Sparse.zero_count(32), 31);
    }

    #[test]
    fn theta_pattern_and_calibration() {
        for scen in 1..=5u8 {
            for &p in &[24usize, 100, 400] {
                let spec = ScenarioSpec::numbered(scen, p).unwrap();
                for alloc in [Allocation::Dense, Allocation::Sparse] {
                    let theta = MeanSpec::new(alloc, 0.05, p).unwrap().theta(&spec).unwrap();
                    let zeros = alloc.zero_count(p);
                    assert!(theta[..zeros].iter().all(|&t| t == 0.0));
                    assert!(theta[zeros..].iter().all(|&t| t > 0.0 && t == theta[zeros]));
                    let tt: f64 = theta.iter().map(|t| t * t).sum();
                    let ratio = tt / spec.covariance_trace_squared().unwrap().sqrt();
                    assert!((ratio - 0.05).abs() <= 1e-12 * 0.05, "{ratio}");
                }
                let null = MeanSpec::null(p).theta(&spec).unwrap();
                assert!(null.iter().all(|&t| t == 0.0));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = ScenarioSpec::numbered(1, 24).unwrap();
        let a = sample(&spec, &MeanSpec::null(24), 30, 99).unwrap();
        let b = sample(&spec, &MeanSpec::null(24), 30, 99).unwrap();
        assert_eq!(a, b);
        let c = sample(&spec, &MeanSpec::null(24), 30, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn normal_sample_covariance_matches_scatter() {
        let spec = ScenarioSpec::numbered(1, 5).unwrap();
        let x = sample(&spec, &MeanSpec::null(5), 10_000, 1).unwrap();
        let c = sample_covariance(&x);
        let err = c.relative_frobenius_error(&spec.scatter.materialize());
        assert!(err < 0.05, "relative error {err}");
    }

    #[test]
    fn mvt_sample_covariance_is_twice_scatter() {
        let spec = ScenarioSpec::numbered(2, 5).unwrap();
        let x = sample(&spec, &MeanSpec::null(5), 10_000, 2).unwrap();
        let c = sample_covariance(&x);
        let mut two_sigma = spec.scatter.materialize();
        for i in 0..5 {
            for j in 0..5 {
                two_sigma[(i, j)] *= 2.0;
            }
        }
        let err = c.relative_frobenius_error(&two_sigma);
        assert!(err < 0.08, "relative error {err}");
    }

    #[test]
    fn mixed_normal_with_zero_gamma_is_normal() {
        let normal = ScenarioSpec::new(NoiseKind::Normal, ScatterSpec::toeplitz(0.5, 8).unwrap()).unwrap();
        let mixed = ScenarioSpec::new(
            NoiseKind::MixedNormal { gamma: 0.0, tau: 3.0 },
            ScatterSpec::toeplitz(0.5, 8).unwrap(),
        )
        .unwrap();
        for seed in 0..5 {
            let a = sample(&normal, &MeanSpec::null(8), 50, seed).unwrap();
            let b = sample(&mixed, &MeanSpec::null(8), 50, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn elliptical_signs_are_centered() {
        let reps = 100_000;
        for scen in 1..=3u8 {
            let spec = ScenarioSpec::numbered(scen, 4).unwrap();
            let x = sample(&spec, &MeanSpec::null(4), reps, 40 + u64::from(scen)).unwrap();
            let mut sum = [0.0; 4];
            let mut sq = [0.0; 4];
            for i in 0..reps {
                let u = spatial_sign(x.row(i)).unwrap();
                for k in 0..4 {
                    sum[k] += u[k];
                    sq[k] += u[k] * u[k];
                }
            }
            for k in 0..4 {
                let mean = sum[k] / reps as f64;
                let se = ((sq[k] / reps as f64 - mean * mean) / reps as f64).sqrt();
                assert!(mean.abs() < 5.0 * se, "scenario {scen} component {k}: {mean} vs se {se}");
            }
        }
    }
}
