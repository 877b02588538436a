//! Replication engine for empirical size and power.
//!
//! A replication draws one sample from its own substream and evaluates every
//! requested test on that same sample, so tests are compared on common data.
//! Rejections are reduced as integer counts in replication order, which makes
//! every cell independent of the worker count.

pub mod reference;
pub mod report;
pub mod store;
pub mod tables;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::core_math::{SampleMatrix, ScatterSpec};
use crate::error::{Error, Result};
use crate::rng::{substream, Domain};
use crate::samplers::{Allocation, MeanSpec, NoiseKind, Sampler, ScenarioSpec};
use crate::stat_tests::{critical_z, raw_statistic, run_test, TestKind, TraceMode};

pub const MIN_NULL_REPS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: NoiseKind,
    /// Toeplitz scatter parameter, `Σ_ij = rho^|i-j|`.
    pub rho: f64,
    pub n: usize,
    pub p: usize,
    pub allocation: Allocation,
    pub signal: f64,
    pub tests: Vec<TestKind>,
    pub alpha: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub size_corrected: bool,
    pub null_reps: usize,
    pub trace_mode: TraceMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        ScatterSpec::toeplitz(self.rho, self.p.max(1))?;
        if self.p == 0 {
            return Err(Error::InvalidParameter("p must be positive".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::InvalidParameter("no tests requested".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be positive".into()));
        }
        if self.size_corrected && self.null_reps < MIN_NULL_REPS {
            return Err(Error::TooFewReplications { needed: MIN_NULL_REPS, got: self.null_reps });
        }
        for t in &self.tests {
            if self.n < t.min_rows() {
                return Err(Error::TooFewObservations { needed: t.min_rows(), got: self.n });
            }
            if *t == TestKind::Tsr {
                if self.n <= self.p {
                    return Err(Error::InvalidParameter(format!(
                        "TSR needs n > p, got n = {}, p = {}",
                        self.n, self.p
                    )));
                }
                if !self.size_corrected {
                    return Err(Error::InvalidParameter("TSR is only available size-corrected".into()));
                }
            }
        }
        MeanSpec::new(self.allocation, self.signal, self.p)?;
        Ok(())
    }

    pub fn scenario_spec(&self) -> Result<ScenarioSpec> {
        ScenarioSpec::new(self.scenario, ScatterSpec::toeplitz(self.rho, self.p)?)
    }

    pub fn mean_spec(&self) -> Result<MeanSpec> {
        MeanSpec::new(self.allocation, self.signal, self.p)
    }

    /// Content address of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }

    /// The same configuration with the mean set to zero.
    pub fn null_version(&self) -> Self {
        Self { allocation: Allocation::Null, signal: 0.0, ..self.clone() }
    }

    pub fn scenario_label(&self) -> String {
        scenario_label(&self.scenario)
    }
}

/// Roman numeral for the five numbered scenarios, else the law's label.
pub fn scenario_label(noise: &NoiseKind) -> String {
    (1..=5u8)
        .find(|&k| NoiseKind::scenario(k).ok().as_ref() == Some(noise))
        .map(|k| ["I", "II", "III", "IV", "V"][usize::from(k) - 1].to_string())
        .unwrap_or_else(|| noise.label())
}

/// One cell of a size/power table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub test: TestKind,
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub allocation: Allocation,
    pub signal: f64,
    pub rejections: u64,
    pub reps: u64,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
    pub seed: u64,
    pub size_corrected: bool,
    pub critical_value: Option<f64>,
    pub wall_time: f64,
}

impl PowerRow {
    fn new(config: &ExperimentConfig, test: TestKind, rejections: u64, critical_value: Option<f64>, wall_time: f64) -> Self {
        let reps = config.reps as u64;
        let rate = rejections as f64 / reps as f64;
        Self {
            test,
            scenario: config.scenario_label(),
            n: config.n,
            p: config.p,
            allocation: config.allocation,
            signal: config.signal,
            rejections,
            reps,
            rejection_rate: rate,
            mc_stderr: (rate * (1.0 - rate) / reps as f64).sqrt(),
            seed: config.master_seed,
            size_corrected: config.size_corrected,
            critical_value,
            wall_time,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn find(&self, test: TestKind, scenario: &str, n: usize, p: usize, allocation: Allocation) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.test == test && r.scenario == scenario && r.n == n && r.p == p && r.allocation == allocation)
    }
}

/// Index of the upper order statistic used as the critical value:
/// `ceil((1 - alpha) reps)`, 1-based.
pub fn critical_order_index(alpha: f64, reps: usize) -> usize {
    let k = ((1.0 - alpha) * reps as f64 - 1e-9).ceil() as usize;
    k.clamp(1, reps)
}

fn draw_replication(sampler: &Sampler, n: usize, master: u64, domain: Domain, r: usize) -> Result<SampleMatrix> {
    sampler.draw(n, &mut substream(master, domain, r as u64))
}

fn wrap(r: usize, test: TestKind, e: Error) -> Error {
    Error::Replication { replication: r, test: test.label().into(), source: Box::new(e) }
}

/// First error in replication order, so failures are reported the same way
/// for any worker count.
fn collect_ordered<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Simulated null critical values of the raw statistics, one per test, all
/// computed on common null draws from a dedicated stream family.
pub fn simulate_critical_values(config: &ExperimentConfig, tests: &[TestKind], alpha: f64) -> Result<Vec<f64>> {
    let null = config.null_version();
    let spec = null.scenario_spec()?;
    let sampler = Sampler::new(&spec, &null.mean_spec()?)?;
    let stats: Vec<Vec<f64>> = collect_ordered(
        (0..config.null_reps)
            .into_par_iter()
            .map(|r| {
                let x = draw_replication(&sampler, config.n, config.master_seed, Domain::NullCalibration, r)?;
                tests.iter().map(|&t| raw_statistic(t, &x).map_err(|e| wrap(r, t, e))).collect()
            })
            .collect(),
    )?;
    let k = critical_order_index(alpha, config.null_reps);
    Ok((0..tests.len())
        .map(|t| {
            let mut col: Vec<f64> = stats.iter().map(|s| s[t]).collect();
            col.sort_by(f64::total_cmp);
            col[k - 1]
        })
        .collect())
}

/// Upper-alpha null quantile of one raw statistic.
pub fn simulate_critical_value(config: &ExperimentConfig, test: TestKind, alpha: f64) -> Result<f64> {
    if config.null_reps < MIN_NULL_REPS {
        return Err(Error::TooFewReplications { needed: MIN_NULL_REPS, got: config.null_reps });
    }
    Ok(simulate_critical_values(config, &[test], alpha)?[0])
}

/// Runs every replication of one configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<PowerTable> {
    run_experiment_with_critical(config, None)
}

/// As [`run_experiment`], with critical values supplied by the caller (one
/// per test, in `config.tests` order) instead of simulated here.
pub fn run_experiment_with_critical(config: &ExperimentConfig, critical: Option<&[f64]>) -> Result<PowerTable> {
    config.validate()?;
    let start = Instant::now();
    let critical: Option<Vec<f64>> = match (config.size_corrected, critical) {
        (false, _) => None,
        (true, Some(c)) => {
            if c.len() != config.tests.len() {
                return Err(Error::Dimension("one critical value per test is required".into()));
            }
            Some(c.to_vec())
        }
        (true, None) => Some(simulate_critical_values(config, &config.tests, config.alpha)?),
    };
    let spec = config.scenario_spec()?;
    let sampler = Sampler::new(&spec, &config.mean_spec()?)?;
    let z_alpha = critical_z(config.alpha);
    let decisions: Vec<Vec<bool>> = collect_ordered(
        (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let x = draw_replication(&sampler, config.n, config.master_seed, Domain::Sample, r)?;
                config
                    .tests
                    .iter()
                    .enumerate()
                    .map(|(t, &kind)| match &critical {
                        Some(c) => raw_statistic(kind, &x).map(|s| s > c[t]),
                        None => run_test(kind, &x, config.alpha, config.trace_mode).map(|res| res.z > z_alpha),
                    }
                    .map_err(|e| wrap(r, kind, e)))
                    .collect()
            })
            .collect(),
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    let rows = config
        .tests
        .iter()
        .enumerate()
        .map(|(t, &kind)| {
            let count = decisions.iter().filter(|d| d[t]).count() as u64;
            PowerRow::new(config, kind, count, critical.as_ref().map(|c| c[t]), elapsed)
        })
        .collect();
    Ok(PowerTable { rows })
}
