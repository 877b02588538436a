//! Mean-based statistic `T_CQ = (1 / (n(n-1))) Σ_{i≠j} X_iᵀX_j`.
//!
//! Its null variance is `2 tr(Λ²) / (n(n-1))`. `tr(Λ²)` is estimated by the
//! location-invariant U-statistic
//! `(X_i - X_j)ᵀ(X_k - X_l) · (X_k - X_j)ᵀ(X_i - X_l) / 2`, whose expectation
//! is exactly `tr(Λ²)`, averaged over all ordered distinct quadruples as in
//! the cited construction. The sum over the last index is closed-form in
//! the Gram matrix and its square, so the full average costs O(n³).

use super::{check_alpha, falling, Diagnostics, TestKind, TestResult};
use crate::core_math::{column_centered, gram, SampleMatrix};
use crate::error::{Error, Result};

pub fn cq_statistic(x: &SampleMatrix) -> Result<f64> {
    let n = x.n();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let g = gram(x.matrix());
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..i {
            off += g[(i, j)];
        }
    }
    Ok(2.0 * off / (n * (n - 1)) as f64)
}

/// Reduced-index estimate of `tr(Λ²)`.
pub fn cq_trace_reduced(x: &SampleMatrix, i: usize) -> Result<f64> {
    let n = x.n();
    if n < 4 {
        return Err(Error::TooFewObservations { needed: 4, got: n });
    }
    if i >= n {
        return Err(Error::InvalidParameter(format!("frozen index {i} out of range for n = {n}")));
    }
    let g = gram(&column_centered(x));
    let g = |a: usize, b: usize| g[(a, b)];
    let mut total = 0.0;
    for j in (0..n).filter(|&j| j != i) {
        for k in (0..n).filter(|&k| k != i && k != j) {
            let (g_ik, g_jk, g_ji) = (g(i, k), g(j, k), g(j, i));
            for l in (0..n).filter(|&l| l != i && l != j && l != k) {
                let (g_il, g_jl, g_kl) = (g(i, l), g(j, l), g(k, l));
                total += (g_ik - g_il - g_jk + g_jl) * (g_ik - g_kl - g_ji + g_jl);
            }
        }
    }
    Ok(total / (2.0 * falling(n - 1, 3)))
}

/// Estimate of `tr(Λ²)` over all ordered distinct quadruples.
///
/// With `u_l = g_jl - g_il` and `v_l = g_jl - g_kl` the summand is
/// `(a + u_l)(b + v_l)`, so summing over `l` needs only row sums of `G` and
/// entries of `G²`, minus the three excluded values of `l`.
pub fn cq_trace_full(x: &SampleMatrix) -> Result<f64> {
    let n = x.n();
    if n < 4 {
        return Err(Error::TooFewObservations { needed: 4, got: n });
    }
    let gm = gram(&column_centered(x));
    let q = gram(&gm);
    let row: Vec<f64> = (0..n).map(|a| gm.row(a).iter().sum()).collect();
    let g = |a: usize, b: usize| gm[(a, b)];
    let m = (n - 3) as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let su = row[j] - row[i];
            for k in (0..n).filter(|&k| k != i && k != j) {
                let a = g(i, k) - g(j, k);
                let b = g(i, k) - g(j, i);
                let (mut eu, mut ev, mut euv) = (0.0, 0.0, 0.0);
                for l in [i, j, k] {
                    let (u, v) = (g(j, l) - g(i, l), g(j, l) - g(k, l));
                    eu += u;
                    ev += v;
                    euv += u * v;
                }
                let sv = row[j] - row[k];
                let suv = q[(j, j)] - q[(j, k)] - q[(i, j)] + q[(i, k)];
                total += m * a * b + a * (sv - ev) + b * (su - eu) + (suv - euv);
            }
        }
    }
    Ok(total / (2.0 * falling(n, 4)))
}

pub fn cq_test(x: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    x.require_rows(4)?;
    let raw = cq_statistic(x)?;
    let trace_hat = cq_trace_full(x)?;
    if !(trace_hat > 0.0) {
        return Err(Error::DegenerateVariance(trace_hat));
    }
    let n = x.n() as f64;
    let sigma = (2.0 * trace_hat / (n * (n - 1.0))).sqrt();
    TestResult::standardize(TestKind::Cq, raw, Some(trace_hat), sigma, alpha, Diagnostics::default())
}
