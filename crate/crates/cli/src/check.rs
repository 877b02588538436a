//! Self-check suite: small-scale versions of the correctness properties,
//! each reported with its measured value and the bound it must meet.

use hdloc::analysis::tau_f_check;
use hdloc::core_math::sphere_moment_check;
use hdloc::rng::{substream, Domain};
use hdloc::samplers::{sample, Sampler};
use hdloc::simharness::{run_experiment, simulate_critical_value, ExperimentConfig};
use hdloc::stat_tests::sr::{sr_statistic_fast_with, OverlapCoefficients, OVERLAP};
use hdloc::stat_tests::{raw_statistic, sr_statistic_naive};
use hdloc::{Allocation, Matrix, MeanSpec, NoiseKind, SampleMatrix, ScenarioSpec, TestKind, TraceMode};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub required: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {} (required {})", self.name, self.measured, self.required)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub seed: u64,
    /// Evaluate the fast signed-rank path with a wrong overlap constant.
    pub corrupt_fast_path: bool,
}

pub fn run_checks(o: CheckOptions) -> Vec<CheckOutcome> {
    vec![
        oracle_equality(o),
        sphere_moments(o.seed, 2),
        sphere_moments(o.seed, 4),
        tau_limit(o.seed),
        null_size(o.seed),
        simulated_critical_value(o.seed),
    ]
}

fn outcome(name: &'static str, passed: bool, measured: String, required: impl Into<String>) -> CheckOutcome {
    CheckOutcome { name, passed, measured, required: required.into() }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> CheckOutcome {
    outcome(name, false, format!("error: {e}"), "no error")
}

const ORACLE_FIXTURES: usize = 200;
const ORACLE_TOL: f64 = 1e-10;

fn fixtures(seed: u64) -> hdloc::Result<Vec<SampleMatrix>> {
    let mut out = Vec::with_capacity(ORACLE_FIXTURES + 1);
    for i in 0..ORACLE_FIXTURES {
        let n = 4 + i % 9;
        let p = 1 + (i / 9) % 10;
        let spec = ScenarioSpec::numbered(1 + (i % 5) as u8, p)?;
        out.push(sample(&spec, &MeanSpec::null(p), n, seed.wrapping_add(i as u64))?);
    }
    // Opposite rows give exactly zero Walsh sums.
    out.push(SampleMatrix::from_rows(&[
        vec![1.0, 2.0],
        vec![-1.0, -2.0],
        vec![0.5, -1.0],
        vec![3.0, 0.0],
        vec![-3.0, 0.0],
    ])?);
    Ok(out)
}

fn oracle_equality(o: CheckOptions) -> CheckOutcome {
    const NAME: &str = "oracle-equality";
    let coef = if o.corrupt_fast_path { OverlapCoefficients { one_shared: 3.0, ..OVERLAP } } else { OVERLAP };
    let fx = match fixtures(o.seed) {
        Ok(f) => f,
        Err(e) => return failed(NAME, e),
    };
    let mut worst: f64 = 0.0;
    for x in &fx {
        match (sr_statistic_fast_with(x, coef), sr_statistic_naive(x)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            (Err(e), _) | (_, Err(e)) => return failed(NAME, e),
        }
    }
    outcome(
        NAME,
        worst < ORACLE_TOL,
        format!("max |fast - naive| = {worst:.3e} over {} fixtures", fx.len()),
        format!("< {ORACLE_TOL:e}"),
    )
}

fn random_symmetric(p: usize, seed: u64) -> Matrix {
    let g = sample(&ScenarioSpec::new(NoiseKind::Normal, hdloc::ScatterSpec::identity(p)).unwrap(), &MeanSpec::null(p), p, seed)
        .unwrap();
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] = 0.5 * (g.row(i)[j] + g.row(j)[i]);
        }
    }
    m
}

const SPHERE_REPS: usize = 20_000;
const SPHERE_MAX_Z: f64 = 5.0;

fn sphere_moments(seed: u64, order: u8) -> CheckOutcome {
    let name = if order == 2 { "sphere-second-moment" } else { "sphere-fourth-moment" };
    let mut worst: f64 = 0.0;
    for p in [5, 20, 100] {
        let m = random_symmetric(p, seed ^ p as u64);
        match sphere_moment_check(&m, SPHERE_REPS, seed) {
            Ok(r) => {
                let (mc, exact, se) = if order == 2 { (r.mc2, r.exact2, r.se2) } else { (r.mc4, r.exact4, r.se4) };
                worst = worst.max((mc - exact).abs() / se);
            }
            Err(e) => return failed(name, e),
        }
    }
    outcome(
        name,
        worst <= SPHERE_MAX_Z,
        format!("max |mc - exact| / se = {worst:.2} at p in {{5, 20, 100}}"),
        format!("<= {SPHERE_MAX_Z}"),
    )
}

fn tau_limit(seed: u64) -> CheckOutcome {
    const NAME: &str = "tau-limit";
    match tau_f_check(NoiseKind::Normal, &[10, 200], 200, 200, seed) {
        Ok(est) => {
            let (lo, hi) = (est[0].corrected, est[1].corrected);
            let in_band = (0.45..=0.55).contains(&hi);
            let rising = hi + 3.0 * est[1].se >= lo;
            outcome(
                NAME,
                in_band && rising,
                format!("tau(10) = {lo:.4}, tau(200) = {hi:.4} (se {:.4})", est[1].se),
                "tau(200) in [0.45, 0.55] and not below tau(10)",
            )
        }
        Err(e) => failed(NAME, e),
    }
}

fn null_config(seed: u64, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        scenario: NoiseKind::Normal,
        rho: 0.5,
        n: 30,
        p: 100,
        allocation: Allocation::Null,
        signal: 0.0,
        tests: vec![TestKind::Cq, TestKind::Ss, TestKind::Sr],
        alpha: 0.05,
        reps,
        master_seed: seed,
        size_corrected: false,
        null_reps: 2000,
        trace_mode: TraceMode::Reduced,
    }
}

fn null_size(seed: u64) -> CheckOutcome {
    const NAME: &str = "null-calibration";
    let (lo, hi) = (0.02, 0.09);
    match run_experiment(&null_config(seed, 1000)) {
        Ok(t) => {
            let rates: Vec<String> =
                t.rows.iter().map(|r| format!("{} {:.1}%", r.test, 100.0 * r.rejection_rate)).collect();
            let ok = t.rows.iter().all(|r| (lo..=hi).contains(&r.rejection_rate));
            outcome(NAME, ok, format!("sizes {} (n = 30, p = 100, 1000 reps)", rates.join(", ")), "each in [2%, 9%]")
        }
        Err(e) => failed(NAME, e),
    }
}

const FRESH_DRAWS: usize = 2000;

/// Rejection rate of the raw SR statistic against its simulated critical
/// value, on fresh null draws from the replication stream family.
fn size_with_simulated_critical(seed: u64) -> hdloc::Result<f64> {
    let mut c = null_config(seed, FRESH_DRAWS);
    c.tests = vec![TestKind::Sr];
    let crit = simulate_critical_value(&c, TestKind::Sr, c.alpha)?;
    let sampler = Sampler::new(&c.scenario_spec()?, &MeanSpec::null(c.p))?;
    let mut rejections = 0;
    for r in 0..c.reps {
        let x = sampler.draw(c.n, &mut substream(seed, Domain::Sample, r as u64))?;
        if raw_statistic(TestKind::Sr, &x)? > crit {
            rejections += 1;
        }
    }
    Ok(rejections as f64 / c.reps as f64)
}

fn simulated_critical_value(seed: u64) -> CheckOutcome {
    const NAME: &str = "simulated-critical-value";
    match size_with_simulated_critical(seed) {
        Ok(rate) => outcome(
            NAME,
            (0.03..=0.07).contains(&rate),
            format!("SR size with simulated critical value = {:.1}% ({FRESH_DRAWS} fresh draws)", 100.0 * rate),
            "in [3%, 7%]",
        ),
        Err(e) => failed(NAME, e),
    }
}
