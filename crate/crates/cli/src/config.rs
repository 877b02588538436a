//! Flat `key = value` experiment files.
//!
//! Keys are the [`ExperimentConfig`] field names. `#` starts a comment.
//! Unknown or repeated keys are errors, so a typo cannot silently fall back
//! to a default.
//!
//! ```text
//! scenario = II          # I..V, or normal, t(4), mn(0.2,3), factor_t(4), factor_mn(0.2,3)
//! n = 40
//! p = 400
//! allocation = dense
//! signal = 0.05
//! tests = cq, ss, sr
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hdloc::simharness::tables::{DEFAULT_ALPHA, DEFAULT_NULL_REPS, DEFAULT_REPS, SCATTER_RHO};
use hdloc::simharness::ExperimentConfig;
use hdloc::{Allocation, NoiseKind, TestKind, TraceMode};

const KEYS: [&str; 13] = [
    "scenario",
    "rho",
    "n",
    "p",
    "allocation",
    "signal",
    "tests",
    "alpha",
    "reps",
    "master_seed",
    "size_corrected",
    "null_reps",
    "trace_mode",
];

pub fn parse_scenario(s: &str) -> Result<NoiseKind> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let numbered = ["i", "ii", "iii", "iv", "v"];
    if let Some(k) = numbered.iter().position(|r| *r == t) {
        return Ok(NoiseKind::scenario(k as u8 + 1)?);
    }
    if let Ok(k) = t.parse::<u8>() {
        return Ok(NoiseKind::scenario(k)?);
    }
    let args = |prefix: &str| -> Option<Vec<f64>> {
        let inner = t.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
        inner.split(',').map(|a| a.parse().ok()).collect()
    };
    let kind = if t == "normal" || t == "n" {
        NoiseKind::Normal
    } else if let Some([df]) = args("factor_t").as_deref() {
        NoiseKind::FactorT { df: whole(*df)? }
    } else if let Some([gamma, tau]) = args("factor_mn").as_deref() {
        NoiseKind::FactorMixed { gamma: *gamma, tau: *tau }
    } else if let Some([df]) = args("t").as_deref() {
        NoiseKind::Mvt { df: whole(*df)? }
    } else if let Some([gamma, tau]) = args("mn").as_deref() {
        NoiseKind::MixedNormal { gamma: *gamma, tau: *tau }
    } else {
        bail!("unknown scenario {s:?}; expected I..V, normal, t(df), mn(gamma,tau), factor_t(df) or factor_mn(gamma,tau)")
    };
    kind.validate()?;
    Ok(kind)
}

fn whole(v: f64) -> Result<u32> {
    if v.fract() != 0.0 || !(1.0..=1e6).contains(&v) {
        bail!("degrees of freedom must be a positive integer, got {v}");
    }
    Ok(v as u32)
}

pub fn parse_tests(s: &str) -> Result<Vec<TestKind>> {
    let tests: Vec<TestKind> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<TestKind>().map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    if tests.is_empty() {
        bail!("empty test list");
    }
    Ok(tests)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("expected true or false, got {s:?}"),
    }
}

fn lookup<T>(
    entries: &BTreeMap<&str, (usize, &str)>,
    key: &str,
    parse: impl FnOnce(&str) -> Result<T>,
) -> Result<Option<T>> {
    entries
        .get(key)
        .map(|&(line, v)| parse(v).with_context(|| format!("line {line}: {key}")))
        .transpose()
}

pub fn read_config(path: &Path, default_seed: u64) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config(&text, default_seed).with_context(|| format!("in {}", path.display()))
}

pub fn parse_config(text: &str, default_seed: u64) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            bail!("line {}: unknown key {key:?}; valid keys are {}", i + 1, KEYS.join(", "));
        }
        if let Some((first, _)) = entries.insert(key, (i + 1, value)) {
            bail!("line {}: key {key:?} already set on line {first}", i + 1);
        }
    }
    for required in ["scenario", "n", "p"] {
        if !entries.contains_key(required) {
            bail!("missing required key {required:?}");
        }
    }

    let mut c = ExperimentConfig {
        scenario: NoiseKind::Normal,
        rho: SCATTER_RHO,
        n: 0,
        p: 0,
        allocation: Allocation::Null,
        signal: 0.0,
        tests: vec![TestKind::Cq, TestKind::Ss, TestKind::Sr],
        alpha: DEFAULT_ALPHA,
        reps: DEFAULT_REPS,
        master_seed: default_seed,
        size_corrected: false,
        null_reps: DEFAULT_NULL_REPS,
        trace_mode: TraceMode::default(),
    };
    if let Some(v) = lookup(&entries, "scenario", parse_scenario)? {
        c.scenario = v;
    }
    if let Some(v) = lookup(&entries, "rho", |s| Ok(s.parse()?))? {
        c.rho = v;
    }
    if let Some(v) = lookup(&entries, "n", |s| Ok(s.parse()?))? {
        c.n = v;
    }
    if let Some(v) = lookup(&entries, "p", |s| Ok(s.parse()?))? {
        c.p = v;
    }
    if let Some(v) = lookup(&entries, "allocation", |s| Ok(s.parse()?))? {
        c.allocation = v;
    }
    if let Some(v) = lookup(&entries, "signal", |s| Ok(s.parse()?))? {
        c.signal = v;
    }
    if let Some(v) = lookup(&entries, "tests", parse_tests)? {
        c.tests = v;
    }
    if let Some(v) = lookup(&entries, "alpha", |s| Ok(s.parse()?))? {
        c.alpha = v;
    }
    if let Some(v) = lookup(&entries, "reps", |s| Ok(s.parse()?))? {
        c.reps = v;
    }
    if let Some(v) = lookup(&entries, "master_seed", |s| Ok(s.parse()?))? {
        c.master_seed = v;
    }
    if let Some(v) = lookup(&entries, "size_corrected", parse_bool)? {
        c.size_corrected = v;
    }
    if let Some(v) = lookup(&entries, "null_reps", |s| Ok(s.parse()?))? {
        c.null_reps = v;
    }
    if let Some(v) = lookup(&entries, "trace_mode", |s| Ok(s.parse()?))? {
        c.trace_mode = v;
    }
    if c.allocation == Allocation::Null && c.signal != 0.0 {
        bail!("signal must be 0 with a null allocation");
    }
    Ok(c)
}
