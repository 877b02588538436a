//! Spatial-sign statistic `T_SS = (1 / (n(n-1))) Σ_{i≠j} U(X_i)ᵀU(X_j)`.
//!
//! Standardized with `σ² = 2 tr(B²) / (n(n-1))`, `tr(B²)` estimated by the
//! average of `(U(X_i)ᵀU(X_j))²` over distinct pairs.

use super::{check_alpha, Diagnostics, TestKind, TestResult};
use crate::core_math::{gram, SampleMatrix};
use crate::error::{Error, Result};

struct SignInnerProducts {
    stat: f64,
    trace_b2: f64,
    zero_rows: usize,
}

fn sign_inner_products(x: &SampleMatrix) -> Result<SignInnerProducts> {
    let n = x.n();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let g = gram(x.matrix());
    let inv: Vec<f64> = (0..n)
        .map(|i| {
            let r2 = g[(i, i)];
            if r2 > 0.0 { 1.0 / r2.sqrt() } else { 0.0 }
        })
        .collect();
    let zero_rows = inv.iter().filter(|&&v| v == 0.0).count();
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..i {
            let c = g[(i, j)] * inv[i] * inv[j];
            s1 += c;
            s2 += c * c;
        }
    }
    let pairs = (n * (n - 1)) as f64;
    Ok(SignInnerProducts { stat: 2.0 * s1 / pairs, trace_b2: 2.0 * s2 / pairs, zero_rows })
}

pub fn ss_statistic(x: &SampleMatrix) -> Result<f64> {
    Ok(sign_inner_products(x)?.stat)
}

pub fn ss_test(x: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let s = sign_inner_products(x)?;
    let n = x.n() as f64;
    let sigma = (2.0 * s.trace_b2 / (n * (n - 1.0))).sqrt();
    TestResult::standardize(
        TestKind::Ss,
        s.stat,
        Some(s.trace_b2),
        sigma,
        alpha,
        Diagnostics { zero_signs: s.zero_rows },
    )
}
