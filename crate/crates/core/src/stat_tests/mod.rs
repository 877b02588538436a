//! One-sample location tests for `H0: theta = 0`.
//!
//! * [`sr`]: high-dimensional signed-rank statistic over signs of Walsh sums.
//! * [`ss`]: spatial-sign statistic.
//! * [`cq`]: mean-based statistic over raw inner products.
//! * [`tsr`]: classical signed-rank statistic with an estimated scatter.
//!
//! All tests are one-sided and reject for large standardized statistics.

pub mod cq;
pub mod sr;
pub mod ss;
pub mod trace;
pub mod tsr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub use cq::{cq_statistic, cq_test, cq_trace_full, cq_trace_reduced};
pub use sr::{sr_statistic_fast, sr_statistic_naive, sr_test};
pub use ss::{ss_statistic, ss_test};
pub use trace::{trace_sigma2_full, trace_sigma2_reduced, TraceMode};
pub use tsr::tsr_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TestKind {
    Cq,
    Ss,
    Sr,
    Tsr,
}

impl TestKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Cq => "CQ",
            Self::Ss => "SS",
            Self::Sr => "SR",
            Self::Tsr => "TSR",
        }
    }

    /// Smallest sample size the statistic accepts.
    pub fn min_rows(&self) -> usize {
        match self {
            Self::Ss => 2,
            Self::Cq | Self::Sr => 4,
            Self::Tsr => 2,
        }
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for TestKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cq" => Ok(Self::Cq),
            "ss" => Ok(Self::Ss),
            "sr" => Ok(Self::Sr),
            "tsr" => Ok(Self::Tsr),
            _ => Err(Error::InvalidParameter(format!("unknown test {s:?}; expected sr, ss, cq or tsr"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Rows or pairwise sums whose spatial sign was the zero vector.
    pub zero_signs: usize,
}

/// Outcome of a standardized test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    pub raw: f64,
    /// Estimated trace of the squared scatter or covariance, when the
    /// standardization uses one.
    pub trace_hat: Option<f64>,
    pub sigma_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub diagnostics: Diagnostics,
}

impl TestResult {
    pub(crate) fn standardize(
        test: TestKind,
        raw: f64,
        trace_hat: Option<f64>,
        sigma_hat: f64,
        alpha: f64,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if !(sigma_hat > 0.0) || !sigma_hat.is_finite() {
            return Err(Error::DegenerateVariance(sigma_hat));
        }
        let z = raw / sigma_hat;
        Ok(Self {
            test,
            raw,
            trace_hat,
            sigma_hat,
            z,
            p_value: upper_tail(z),
            alpha,
            reject: z > critical_z(alpha),
            diagnostics,
        })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `1 - Φ(z)`.
pub fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `z_alpha = Φ⁻¹(1 - alpha)`.
pub fn critical_z(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

/// Falling factorial `n (n-1) ... (n-m+1)`.
pub(crate) fn falling(n: usize, m: usize) -> f64 {
    (0..m).map(|k| (n - k) as f64).product()
}

/// Pairwise inverse norms `1 / ||x_a - x_b||` from a Gram matrix, zero on
/// the diagonal and for coincident rows.
pub(crate) fn inverse_difference_norms(g: &crate::core_math::Matrix) -> Vec<f64> {
    let n = g.rows();
    let mut inv = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..a {
            let d2 = g[(a, a)] + g[(b, b)] - 2.0 * g[(a, b)];
            let v = if d2 > 0.0 { 1.0 / d2.sqrt() } else { 0.0 };
            inv[a * n + b] = v;
            inv[b * n + a] = v;
        }
    }
    inv
}

/// Runs one standardized test with the default reduced trace mode.
pub fn run_test(kind: TestKind, x: &crate::core_math::SampleMatrix, alpha: f64, mode: TraceMode) -> Result<TestResult> {
    match kind {
        TestKind::Sr => sr_test(x, alpha, mode),
        TestKind::Ss => ss_test(x, alpha),
        TestKind::Cq => cq_test(x, alpha),
        TestKind::Tsr => Err(Error::InvalidParameter(
            "TSR has no asymptotic standardization; use a simulated critical value".into(),
        )),
    }
}

/// Raw (unstandardized) statistic of any test.
pub fn raw_statistic(kind: TestKind, x: &crate::core_math::SampleMatrix) -> Result<f64> {
    match kind {
        TestKind::Sr => sr_statistic_fast(x),
        TestKind::Ss => ss_statistic(x),
        TestKind::Cq => cq_statistic(x),
        TestKind::Tsr => tsr_statistic(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference() {
        assert!((critical_z(0.05) - 1.644_853_626_951_472_2).abs() < 1e-9);
        assert!((upper_tail(0.0) - 0.5).abs() < 1e-15);
        assert!((upper_tail(1.644_853_626_951_472_2) - 0.05).abs() < 1e-9);
        assert!(upper_tail(1.0) > upper_tail(1.5));
    }

    #[test]
    fn standardize_invariants() {
        let r = TestResult::standardize(TestKind::Sr, 3.0, Some(1.0), 2.0, 0.05, Diagnostics::default()).unwrap();
        assert_eq!(r.z, 1.5);
        assert!((r.p_value - upper_tail(1.5)).abs() < 1e-16);
        assert!(!r.reject);
        let r = TestResult::standardize(TestKind::Sr, 4.0, None, 2.0, 0.05, Diagnostics::default()).unwrap();
        assert!(r.reject);
        assert!(TestResult::standardize(TestKind::Sr, 4.0, None, 0.0, 0.05, Diagnostics::default()).is_err());
        assert!(TestResult::standardize(TestKind::Sr, 4.0, None, 1.0, 1.0, Diagnostics::default()).is_err());
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(4, 4), 24.0);
        assert_eq!(falling(10, 3), 720.0);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("SR".parse::<TestKind>().unwrap(), TestKind::Sr);
        assert_eq!("tsr".parse::<TestKind>().unwrap(), TestKind::Tsr);
        assert!("t".parse::<TestKind>().is_err());
    }
}
