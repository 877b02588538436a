//! Classical multivariate signed-rank statistic
//! `||n⁻² Σ_i Σ_j U(S^{-1/2}(X_i + X_j))||²`, with `S` the sample covariance.
//!
//! `S^{-1/2}` is taken as `L⁻¹` for the Cholesky factor `S = L Lᵀ`. Any two
//! whitening matrices differ by an orthogonal factor, which leaves the norm
//! unchanged, so the statistic is affine invariant. Positive constants in
//! front of the norm are omitted; they cancel under simulated critical
//! values.

use crate::core_math::{cholesky, column_centered, dot, forward_substitute, normalize_in_place, Matrix, SampleMatrix};
use crate::error::{Error, Result};

pub fn tsr_statistic(x: &SampleMatrix) -> Result<f64> {
    let (n, p) = (x.n(), x.p());
    if n <= p {
        return Err(Error::TooFewObservations { needed: p + 1, got: n });
    }
    let centered = column_centered(x);
    let mut cov = Matrix::zeros(p, p);
    for i in 0..n {
        let r = centered.row(i);
        for a in 0..p {
            let ra = r[a];
            for (c, rb) in cov.row_mut(a)[..=a].iter_mut().zip(r) {
                *c += ra * rb;
            }
        }
    }
    for a in 0..p {
        for b in 0..=a {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let l = cholesky(&cov).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot, value } => Error::InvalidParameter(format!(
            "singular scatter estimate (pivot {pivot} is {value:e})"
        )),
        other => other,
    })?;
    // Rounding can leave a tiny positive pivot on an exactly singular matrix.
    for j in 0..p {
        let ljj = l[(j, j)];
        if ljj * ljj <= 1e-12 * cov[(j, j)] {
            return Err(Error::InvalidParameter(format!(
                "singular scatter estimate (pivot {j} is {:e})",
                ljj * ljj
            )));
        }
    }

    let mut white = Matrix::zeros(n, p);
    for i in 0..n {
        let row = white.row_mut(i);
        row.copy_from_slice(x.row(i));
        forward_substitute(&l, row);
    }

    let mut total = vec![0.0; p];
    let mut walsh = vec![0.0; p];
    for i in 0..n {
        let wi = white.row(i);
        // i = j contributes U(2 Y_i) = U(Y_i).
        walsh.copy_from_slice(wi);
        normalize_in_place(&mut walsh);
        total.iter_mut().zip(&walsh).for_each(|(t, u)| *t += u);
        for j in i + 1..n {
            for ((w, a), b) in walsh.iter_mut().zip(wi).zip(white.row(j)) {
                *w = a + b;
            }
            normalize_in_place(&mut walsh);
            total.iter_mut().zip(&walsh).for_each(|(t, u)| *t += 2.0 * u);
        }
    }
    let scale = 1.0 / (n * n) as f64;
    total.iter_mut().for_each(|t| *t *= scale);
    Ok(dot(&total, &total))
}
