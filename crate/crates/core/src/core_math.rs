//! Vector and matrix primitives shared by the statistics and samplers.
//!
//! Matrices are dense, row-major `f64` buffers. Nothing here allocates
//! beyond the returned value, and every function is pure.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{substream, Domain};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// Frobenius norm of `self - other` relative to the norm of `other`.
    pub fn relative_frobenius_error(&self, other: &Matrix) -> f64 {
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        diff.sqrt() / other.frobenius_norm()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// An n x p block of observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix(Matrix);

impl SampleMatrix {
    /// Wraps a matrix after checking that it is non-empty and every entry is
    /// finite.
    pub fn new(data: Matrix) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::Dimension("sample matrix must be non-empty".into()));
        }
        if let Some(pos) = data.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / data.cols(), col: pos % data.cols() });
        }
        Ok(Self(data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn p(&self) -> usize {
        self.0.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let data = self.0.as_slice().iter().map(|v| v * c).collect();
        Self::new(Matrix::from_vec(self.n(), self.p(), data)?)
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut out = Matrix::zeros(self.n(), self.p());
        for (dst, &src) in perm.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(self.row(src));
        }
        Self::new(out)
    }

    /// The same vector added to every row.
    pub fn shifted(&self, shift: &[f64]) -> Result<Self> {
        let mut out = self.0.clone();
        for i in 0..self.n() {
            for (v, s) in out.row_mut(i).iter_mut().zip(shift) {
                *v += s;
            }
        }
        Self::new(out)
    }

    pub fn require_rows(&self, needed: usize) -> Result<()> {
        if self.n() < needed {
            return Err(Error::TooFewObservations { needed, got: self.n() });
        }
        Ok(())
    }
}

/// Dot product with four independent accumulators, which also lets the
/// compiler vectorize the loop.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `x / ||x||`, or the zero vector when `x = 0`.
pub fn spatial_sign(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(col) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, col });
    }
    let mut out = x.to_vec();
    normalize_in_place(&mut out);
    Ok(out)
}

/// In-place spatial sign; returns the norm of the input.
#[inline]
pub(crate) fn normalize_in_place(x: &mut [f64]) -> f64 {
    let r = norm(x);
    if r > 0.0 {
        let inv = 1.0 / r;
        x.iter_mut().for_each(|v| *v *= inv);
    }
    r
}

/// Gram matrix `X Xᵀ` of the rows (n x n, symmetric).
pub fn gram(rows: &Matrix) -> Matrix {
    let n = rows.rows();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = dot(rows.row(i), rows.row(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Copy of `x` with its column means subtracted.
pub fn column_centered(x: &SampleMatrix) -> Matrix {
    let (n, p) = (x.n(), x.p());
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut out = x.matrix().clone();
    for i in 0..n {
        for (v, m) in out.row_mut(i).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    out
}

/// Parameterized scatter (shape) matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ScatterSpec {
    /// `Σ_ij = rho^|i-j|`.
    Toeplitz { rho: f64, p: usize },
    /// An explicit symmetric positive definite matrix.
    Explicit(Matrix),
}

impl ScatterSpec {
    pub fn toeplitz(rho: f64, p: usize) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("toeplitz rho must lie in (-1, 1), got {rho}")));
        }
        if p == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self::Toeplitz { rho, p })
    }

    pub fn identity(p: usize) -> Self {
        Self::Toeplitz { rho: 0.0, p }
    }

    pub fn explicit(m: Matrix) -> Result<Self> {
        if !m.is_symmetric(1e-12 * m.frobenius_norm().max(1.0)) {
            return Err(Error::InvalidParameter("explicit scatter must be square and symmetric".into()));
        }
        Ok(Self::Explicit(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Toeplitz { p, .. } => *p,
            Self::Explicit(m) => m.rows(),
        }
    }

    pub fn materialize(&self) -> Matrix {
        match self {
            Self::Toeplitz { rho, p } => {
                let mut m = Matrix::zeros(*p, *p);
                for i in 0..*p {
                    for j in 0..*p {
                        m[(i, j)] = rho.powi(i.abs_diff(j) as i32);
                    }
                }
                m
            }
            Self::Explicit(m) => m.clone(),
        }
    }

    /// `tr(Σ²)`, in closed form for the Toeplitz family.
    pub fn trace_squared(&self) -> f64 {
        match self {
            Self::Toeplitz { rho, p } => {
                let r2 = rho * rho;
                let mut total = *p as f64;
                let mut pw = 1.0;
                for lag in 1..*p {
                    pw *= r2;
                    total += 2.0 * (*p - lag) as f64 * pw;
                }
                total
            }
            Self::Explicit(m) => m.as_slice().iter().map(|v| v * v).sum(),
        }
    }

    pub fn factor(&self) -> Result<ScatterFactor> {
        match self {
            Self::Toeplitz { rho, p } => Ok(ScatterFactor::Ar1 { rho: *rho, p: *p }),
            Self::Explicit(m) => Ok(ScatterFactor::Dense(cholesky(m)?)),
        }
    }
}

/// Lower Cholesky factor `L` with `L Lᵀ = Σ`.
pub fn scatter_sqrt(spec: &ScatterSpec) -> Result<Matrix> {
    cholesky(&spec.materialize())
}

/// Lower-triangular Cholesky factorization of a symmetric PD matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let p = a.rows();
    if a.cols() != p {
        return Err(Error::Dimension(format!("cholesky needs a square matrix, got {}x{}", p, a.cols())));
    }
    let mut l = Matrix::zeros(p, p);
    for j in 0..p {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..p {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &Matrix, b: &mut [f64]) {
    for i in 0..l.rows() {
        let row = l.row(i);
        let s = dot(&row[..i], &b[..i]);
        b[i] = (b[i] - s) / row[i];
    }
}

/// A scatter square root ready to map spherical noise `z` to `L z`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScatterFactor {
    /// Cholesky factor of the AR(1) correlation matrix, applied in O(p) by
    /// the recursion `x_0 = z_0`, `x_t = rho x_{t-1} + sqrt(1 - rho²) z_t`.
    Ar1 { rho: f64, p: usize },
    Dense(Matrix),
}

impl ScatterFactor {
    pub fn dim(&self) -> usize {
        match self {
            Self::Ar1 { p, .. } => *p,
            Self::Dense(l) => l.rows(),
        }
    }

    /// Overwrites `z` with `L z`.
    pub fn apply_in_place(&self, z: &mut [f64]) {
        match self {
            Self::Ar1 { rho, .. } => {
                if *rho == 0.0 {
                    return;
                }
                let c = (1.0 - rho * rho).sqrt();
                for t in 1..z.len() {
                    z[t] = rho * z[t - 1] + c * z[t];
                }
            }
            Self::Dense(l) => {
                // Row i only reads z[..=i], so walk bottom-up.
                for i in (0..z.len()).rev() {
                    z[i] = dot(&l.row(i)[..=i], &z[..=i]);
                }
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Self::Dense(l) => l.clone(),
            Self::Ar1 { p, .. } => {
                let mut l = Matrix::zeros(*p, *p);
                let mut col = vec![0.0; *p];
                for j in 0..*p {
                    col.iter_mut().for_each(|v| *v = 0.0);
                    col[j] = 1.0;
                    self.apply_in_place(&mut col);
                    for i in 0..*p {
                        l[(i, j)] = col[i];
                    }
                }
                l
            }
        }
    }
}

/// Monte Carlo and exact second and fourth moments of `uᵀ M u` for `u`
/// uniform on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMoments {
    pub mc2: f64,
    pub exact2: f64,
    pub se2: f64,
    pub mc4: f64,
    pub exact4: f64,
    pub se4: f64,
}

impl SphereMoments {
    /// Largest deviation from the exact values in units of the Monte Carlo
    /// standard error. Zero-error estimates that match exactly count as 0.
    pub fn max_z(&self) -> f64 {
        let z = |mc: f64, exact: f64, se: f64| {
            let d = (mc - exact).abs();
            if d <= 1e-12 * exact.abs().max(1.0) {
                0.0
            } else {
                d / se
            }
        };
        z(self.mc2, self.exact2, self.se2).max(z(self.mc4, self.exact4, self.se4))
    }
}

pub const MIN_SPHERE_REPS: usize = 1000;

/// `E(uᵀMu)⁴` from `t_k = tr(M^k)`. For Gaussian `g`, `gᵀMg` has cumulants
/// `κ_r = 2^(r-1) (r-1)! t_r`; the raw fourth moment follows and dividing
/// by `E||g||⁸ = p(p+2)(p+4)(p+6)` removes the independent radius. The
/// shorter `{3 t_2² + 6 t_4}` form sometimes quoted gives 1/40 instead of 1
/// at `M = I_6` and is not used.
pub fn sphere_fourth_moment(t1: f64, t2: f64, t3: f64, t4: f64, p: f64) -> f64 {
    let raw = t1.powi(4) + 12.0 * t1 * t1 * t2 + 12.0 * t2 * t2 + 32.0 * t1 * t3 + 48.0 * t4;
    raw / (p * (p + 2.0) * (p + 4.0) * (p + 6.0))
}

pub fn sphere_moment_check(m: &Matrix, reps: usize, seed: u64) -> Result<SphereMoments> {
    let p = m.rows();
    if p < 2 || !m.is_symmetric(1e-12 * m.frobenius_norm().max(1.0)) {
        return Err(Error::InvalidParameter("need a symmetric matrix with p >= 2".into()));
    }
    if reps < MIN_SPHERE_REPS {
        return Err(Error::TooFewReplications { needed: MIN_SPHERE_REPS, got: reps });
    }
    let pf = p as f64;
    let m2 = m.matmul(m)?;
    let tr = m.trace();
    let tr2 = m2.trace();
    let tr4 = m2.matmul(&m2)?.trace();
    let exact2 = (tr * tr + 2.0 * tr2) / (pf * pf + 2.0 * pf);
    let tr3 = m2.matmul(m)?.trace();
    let exact4 = sphere_fourth_moment(tr, tr2, tr3, tr4, pf);

    let mut u = vec![0.0; p];
    let mut mu = vec![0.0; p];
    let (mut s2, mut ss2, mut s4, mut ss4) = (0.0, 0.0, 0.0, 0.0);
    for r in 0..reps {
        let mut rng = substream(seed, Domain::SphereMoments, r as u64);
        loop {
            u.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            if normalize_in_place(&mut u) > 0.0 {
                break;
            }
        }
        for (i, out) in mu.iter_mut().enumerate() {
            *out = dot(m.row(i), &u);
        }
        let q = dot(&u, &mu);
        let q2 = q * q;
        let q4 = q2 * q2;
        s2 += q2;
        ss2 += q2 * q2;
        s4 += q4;
        ss4 += q4 * q4;
    }
    let rf = reps as f64;
    let se = |s: f64, ss: f64| {
        let mean = s / rf;
        ((ss / rf - mean * mean).max(0.0) / (rf - 1.0)).sqrt()
    };
    Ok(SphereMoments {
        mc2: s2 / rf,
        exact2,
        se2: se(s2, ss2),
        mc4: s4 / rf,
        exact4,
        se4: se(s4, ss4),
    })
}
