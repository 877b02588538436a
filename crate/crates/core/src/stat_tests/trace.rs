//! Sign-based estimators of `tr(Σ²)`.
//!
//! The summand is `U(X_i - X_j)ᵀU(X_k - X_l) · U(X_k - X_j)ᵀU(X_i - X_l)`.
//! Every inner product of differences expands into four Gram entries,
//! `(X_a - X_b)ᵀ(X_c - X_d) = G_ac - G_ad - G_bc + G_bd`, so after one
//! O(n² p) Gram matrix each summand costs O(1). The Gram matrix is built from
//! column-centered data; differences are unaffected and cancellation stays
//! small under location shifts.

use serde::{Deserialize, Serialize};

use super::{falling, inverse_difference_norms};
use crate::core_math::{column_centered, gram, Matrix, SampleMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// All ordered distinct quadruples, O(n⁴) after the Gram matrix.
    Full,
    /// First index frozen at `n / 2`, O(n³).
    #[default]
    Reduced,
}

impl std::str::FromStr for TraceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "reduced" => Ok(Self::Reduced),
            _ => Err(Error::InvalidParameter(format!("unknown trace mode {s:?}; expected full or reduced"))),
        }
    }
}

/// Default frozen index for the reduced estimators.
pub fn default_frozen_index(n: usize) -> usize {
    n / 2
}

pub(crate) fn trace_for_mode(x: &SampleMatrix, mode: TraceMode) -> Result<f64> {
    match mode {
        TraceMode::Full => trace_sigma2_full(x),
        TraceMode::Reduced => trace_sigma2_reduced(x, default_frozen_index(x.n())),
    }
}

struct SignGram {
    n: usize,
    g: Matrix,
    inv: Vec<f64>,
}

impl SignGram {
    fn new(x: &SampleMatrix) -> Self {
        let g = gram(&column_centered(x));
        let inv = inverse_difference_norms(&g);
        Self { n: x.n(), g, inv }
    }

    /// Σ over ordered distinct `(j, k, l)`, all different from `i`.
    fn frozen_sum(&self, i: usize) -> f64 {
        let n = self.n;
        let g = |a: usize, b: usize| self.g[(a, b)];
        let inv = |a: usize, b: usize| self.inv[a * n + b];
        let mut total = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let inv_ij = inv(i, j);
            let g_ji = g(j, i);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let inv_kj = inv(k, j);
                let (g_ik, g_jk) = (g(i, k), g(j, k));
                let mut inner = 0.0;
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    let (g_il, g_jl, g_kl) = (g(i, l), g(j, l), g(k, l));
                    let first = (g_ik - g_il - g_jk + g_jl) * inv(k, l);
                    let second = (g_ik - g_kl - g_ji + g_jl) * inv(i, l);
                    inner += first * second;
                }
                total += inner * inv_ij * inv_kj;
            }
        }
        total
    }
}

/// Full U-statistic `(2 p² / P(n,4)) Σ*`.
pub fn trace_sigma2_full(x: &SampleMatrix) -> Result<f64> {
    if x.n() < 4 {
        return Err(Error::TooFewForQuadruples(x.n()));
    }
    let sg = SignGram::new(x);
    let total: f64 = (0..x.n()).map(|i| sg.frozen_sum(i)).sum();
    let p = x.p() as f64;
    Ok(2.0 * p * p * total / falling(x.n(), 4))
}

/// The same summand with the first index frozen at `i0`, normalized by the
/// number of surviving ordered triples `P(n-1,3)`.
pub fn trace_sigma2_reduced(x: &SampleMatrix, i0: usize) -> Result<f64> {
    if x.n() < 4 {
        return Err(Error::TooFewForQuadruples(x.n()));
    }
    if i0 >= x.n() {
        return Err(Error::InvalidParameter(format!("frozen index {i0} out of range for n = {}", x.n())));
    }
    let sg = SignGram::new(x);
    let p = x.p() as f64;
    Ok(2.0 * p * p * sg.frozen_sum(i0) / falling(x.n() - 1, 3))
}
