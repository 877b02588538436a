//! Signed-rank statistic
//!
//! `T_n = (1 / P(n,4)) Σ U(X_i + X_j)ᵀ U(X_k + X_l)` over ordered quadruples of
//! pairwise-distinct indices.
//!
//! Write `u_ij = U(X_i + X_j)`, `v_a = Σ_{b≠a} u_ab`, `q = Σ_{i≠j} ||u_ij||²`.
//! Expanding `||Σ_a v_a||²` over all pairs of ordered pairs and sorting terms
//! by how many indices the two pairs share gives
//!
//! ```text
//! P(n,4) T_n = ||Σ_a v_a||² - 4 (Σ_a ||v_a||² - q) - 2 q
//! ```
//!
//! which costs O(n² p). `q` equals `n (n - 1)` unless some Walsh sum is
//! exactly zero.

use super::trace::{trace_for_mode, TraceMode};
use super::{check_alpha, falling, Diagnostics, TestKind, TestResult};
use crate::core_math::{dot, normalize_in_place, spatial_sign, SampleMatrix};
use crate::error::{Error, Result};

fn require_quadruples(x: &SampleMatrix) -> Result<()> {
    if x.n() < 4 {
        return Err(Error::TooFewForQuadruples(x.n()));
    }
    Ok(())
}

/// Direct O(n⁴ p) enumeration over ordered distinct quadruples.
pub fn sr_statistic_naive(x: &SampleMatrix) -> Result<f64> {
    require_quadruples(x)?;
    let n = x.n();
    let mut signs = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let s: Vec<f64> = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a + b).collect();
                signs[i * n + j] = spatial_sign(&s)?;
            }
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let uij = &signs[i * n + j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    total += dot(uij, &signs[k * n + l]);
                }
            }
        }
    }
    Ok(total / falling(n, 4))
}

/// Coefficients of the pair-overlap corrections in the accumulator form:
/// pairs sharing one index, pairs sharing both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCoefficients {
    pub one_shared: f64,
    pub both_shared: f64,
}

pub const OVERLAP: OverlapCoefficients = OverlapCoefficients { one_shared: 4.0, both_shared: 2.0 };

/// Accumulator form of the signed-rank statistic, O(n² p).
pub fn sr_statistic_fast(x: &SampleMatrix) -> Result<f64> {
    Ok(sr_accumulate(x, OVERLAP)?.0)
}

/// Accumulator form with caller-chosen coefficients; exists so that the
/// oracle comparison can be shown to detect a corrupted constant.
#[doc(hidden)]
pub fn sr_statistic_fast_with(x: &SampleMatrix, c: OverlapCoefficients) -> Result<f64> {
    Ok(sr_accumulate(x, c)?.0)
}

/// Statistic plus the number of zero Walsh sums.
fn sr_accumulate(x: &SampleMatrix, c: OverlapCoefficients) -> Result<(f64, usize)> {
    require_quadruples(x)?;
    let (n, p) = (x.n(), x.p());
    let mut v = vec![0.0; n * p];
    let mut walsh = vec![0.0; p];
    let mut q = 0.0;
    let mut zero = 0;
    for i in 0..n {
        let xi = x.row(i);
        for j in i + 1..n {
            for ((w, a), b) in walsh.iter_mut().zip(xi).zip(x.row(j)) {
                *w = a + b;
            }
            if normalize_in_place(&mut walsh) == 0.0 {
                zero += 1;
                continue;
            }
            q += 2.0 * dot(&walsh, &walsh);
            for (acc, u) in v[i * p..(i + 1) * p].iter_mut().zip(&walsh) {
                *acc += u;
            }
            for (acc, u) in v[j * p..(j + 1) * p].iter_mut().zip(&walsh) {
                *acc += u;
            }
        }
    }
    let mut total = vec![0.0; p];
    let mut sum_sq = 0.0;
    for va in v.chunks_exact(p) {
        sum_sq += dot(va, va);
        for (t, u) in total.iter_mut().zip(va) {
            *t += u;
        }
    }
    let w1 = dot(&total, &total);
    let triples = sum_sq - q;
    Ok(((w1 - c.one_shared * triples - c.both_shared * q) / falling(n, 4), zero))
}

/// Standardized signed-rank test with `σ² = 8 tr(Σ²) / (n² p²)`.
pub fn sr_test(x: &SampleMatrix, alpha: f64, mode: TraceMode) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (raw, zero) = sr_accumulate(x, OVERLAP)?;
    let trace_hat = trace_for_mode(x, mode)?;
    if !(trace_hat > 0.0) {
        return Err(Error::DegenerateTrace(trace_hat));
    }
    let (n, p) = (x.n() as f64, x.p() as f64);
    let sigma = (8.0 * trace_hat / (n * n * p * p)).sqrt();
    TestResult::standardize(TestKind::Sr, raw, Some(trace_hat), sigma, alpha, Diagnostics { zero_signs: zero })
}
