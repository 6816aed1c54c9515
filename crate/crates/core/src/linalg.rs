//! Dense real matrices, norms, and a cyclic Jacobi eigensolver.
//!
//! All reductions run in a fixed left-to-right order so that repeated runs on
//! the same input are bit-identical, whatever the execution mode.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Work threshold (multiply-adds) above which products fan out over rows.
const PARALLEL_MATMUL_WORK: usize = 1 << 18;

/// Dense row-major matrix of finite `f64` values.
///
/// A matrix always has at least one column. Zero rows are allowed so that an
/// empty batch of observations can be represented.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::Shape("matrix needs at least one column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols > 0, "matrix needs at least one column");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds a matrix entry by entry. Panics if `f` yields a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data).expect("from_fn produced an invalid matrix")
    }

    /// An empty (zero-row) matrix with `cols` columns.
    pub fn empty(cols: usize) -> Self {
        Self::zeros(0, cols)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let exec = if self.rows * self.cols * rhs.cols >= PARALLEL_MATMUL_WORK {
            Execution::Parallel
        } else {
            Execution::Sequential
        };
        self.matmul_with(rhs, exec)
    }

    /// Matrix product with an explicit execution mode. Each output entry is
    /// accumulated in the same order in both modes.
    pub fn matmul_with(&self, rhs: &Matrix, exec: Execution) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        let inner = self.cols;
        let width = rhs.cols;
        par::for_each_chunk_mut(&mut out.data, width, exec, |i, out_row| {
            let lhs_row = &self.data[i * inner..(i + 1) * inner];
            for (k, &a) in lhs_row.iter().enumerate() {
                let rhs_row = &rhs.data[k * width..(k + 1) * width];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        });
        out
    }

    /// `selfᵀ * rhs` without materialising the transpose.
    pub fn t_matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "t_matmul shape mismatch");
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = rhs.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Row vector times matrix: `xᵀ * self`.
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "vecmat length mismatch");
        let mut out = vec![0.0; self.cols];
        for (k, &a) in x.iter().enumerate() {
            for (o, &b) in out.iter_mut().zip(self.row(k)) {
                *o += a * b;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "elementwise shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Reorders columns so that column `k` of the result is column `order[k]`.
    pub fn permute_columns(&self, order: &[usize]) -> Matrix {
        assert_eq!(order.len(), self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, order[j])])
    }

    pub fn negate_column(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = &mut self.data[i * self.cols + j];
            *v = -*v;
        }
    }

    /// Rows `start..end` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.rows);
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Stacks matrices vertically. All parts must share a column count.
    pub fn vstack(parts: &[Matrix]) -> Result<Matrix> {
        let cols = parts
            .first()
            .map(|m| m.cols)
            .ok_or_else(|| Error::Shape("nothing to stack".into()))?;
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.cols != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: m.cols,
                });
            }
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Appends one row. Panics on length mismatch.
    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// `‖selfᵀ self − I‖_F`, the departure from orthonormal columns.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.t_matmul(self);
        frobenius_norm(&gram.sub(&Matrix::identity(self.cols)))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Square matrix with exactly symmetric storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Symmetrises `m` as `(m + mᵀ) / 2`. The result is bit-identical for
    /// `m` and `mᵀ`.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (out[(i, j)] + out[(j, i)]) / 2.0;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(SymMatrix(out))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(Matrix::zeros(dim, dim))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(values))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.0)
    }

    /// `α·self + β·v vᵀ`, updating only the upper triangle and mirroring.
    pub(crate) fn scaled_rank_one_update(&mut self, alpha: f64, beta: f64, v: &[f64]) {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        for i in 0..n {
            for j in i..n {
                let value = beta * v[i] * v[j] + alpha * self.0[(i, j)];
                self.0[(i, j)] = value;
                self.0[(j, i)] = value;
            }
        }
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.0)
    }
}

/// Column eigenvectors paired with their eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBasis {
    pub vectors: Matrix,
    pub values: Vec<f64>,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Sorts eigenpairs by non-increasing eigenvalue. Equal values keep
    /// their relative order.
    pub fn sort_descending(&mut self) {
        let order = descending_order(&self.values);
        self.vectors = self.vectors.permute_columns(&order);
        self.values = order.iter().map(|&k| self.values[k]).collect();
    }

    /// Flips each column so that its entry of largest magnitude is positive
    /// (ties go to the lowest row index).
    pub fn apply_sign_convention(&mut self) {
        apply_sign_convention(&mut self.vectors);
    }

    /// `‖A V − V diag(λ)‖_F`.
    pub fn residual(&self, a: &SymMatrix) -> f64 {
        eigen_residual(a, &self.vectors, &self.values)
    }

    pub fn orthonormality_defect(&self) -> f64 {
        self.vectors.orthonormality_defect()
    }
}

/// Column order that sorts `values` in non-increasing order (stable).
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Makes the largest-magnitude entry of every column positive.
pub fn apply_sign_convention(vectors: &mut Matrix) {
    for j in 0..vectors.cols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..vectors.rows() {
            let a = vectors[(i, j)].abs();
            if a > best_abs {
                best = i;
                best_abs = a;
            }
        }
        if vectors[(best, j)] < 0.0 {
            vectors.negate_column(j);
        }
    }
}

/// `‖A V − V diag(λ)‖_F`.
pub fn eigen_residual(a: &SymMatrix, vectors: &Matrix, values: &[f64]) -> f64 {
    let av = a.as_matrix().matmul(vectors);
    let mut sum = 0.0;
    for i in 0..av.rows() {
        for (j, &lambda) in values.iter().enumerate() {
            let r = av[(i, j)] - vectors[(i, j)] * lambda;
            sum += r * r;
        }
    }
    sum.sqrt()
}

/// Square root of the sum of squared entries.
pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Matrix norm used by the refinement gate and stopping test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixNorm {
    /// Frobenius norm, an upper bound on the spectral norm.
    #[default]
    Frobenius,
    /// Exact spectral norm via a Jacobi decomposition of `MᵀM`.
    Spectral,
}

impl MatrixNorm {
    pub fn eval(self, m: &Matrix) -> f64 {
        match self {
            MatrixNorm::Frobenius => frobenius_norm(m),
            MatrixNorm::Spectral => spectral_norm(m),
        }
    }
}

fn spectral_norm(m: &Matrix) -> f64 {
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    let gram = SymMatrix::from_matrix(m.t_matmul(m)).expect("gram matrix is square");
    match jacobi_eigen(&gram) {
        Ok(basis) => basis.values[0].max(0.0).sqrt(),
        // Jacobi on a PSD Gram matrix does not fail in practice; fall back to
        // the Frobenius bound rather than underestimating.
        Err(_) => frobenius_norm(m),
    }
}

/// Sweep cap for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations
/// with threshold sweeps. Eigenvalues are returned in non-increasing order.
///
/// This is the first-fit solver and also the reference that refinement is
/// tested against.
pub fn jacobi_eigen(a: &SymMatrix) -> Result<EigenBasis> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let mut d = m.diagonal();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 1..=JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].abs())
            .sum();
        if off == 0.0 {
            let mut basis = EigenBasis {
                vectors: v,
                values: d,
            };
            basis.sort_descending();
            return Ok(basis);
        }
        // larger threshold during the first sweeps skips negligible rotations
        let thresh = if sweep < 4 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    m[(p, q)] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                m[(p, q)] = 0.0;
                let rotate = |m: &mut Matrix, (i, j): (usize, usize), (k, l): (usize, usize)| {
                    let g = m[(i, j)];
                    let h = m[(k, l)];
                    m[(i, j)] = g - s * (h + g * tau);
                    m[(k, l)] = h + s * (g - h * tau);
                };
                for j in 0..p {
                    rotate(&mut m, (j, p), (j, q));
                }
                for j in (p + 1)..q {
                    rotate(&mut m, (p, j), (j, q));
                }
                for j in (q + 1)..n {
                    rotate(&mut m, (p, j), (q, j));
                }
                for j in 0..n {
                    rotate(&mut v, (j, p), (j, q));
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }

    let off_norm = (0..n)
        .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
        .map(|(p, q)| m[(p, q)] * m[(p, q)])
        .sum::<f64>()
        .sqrt();
    Err(Error::EigenNoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
        off_norm,
    })
}

/// Column means and the unbiased (`n − 1`) sample covariance of `x`.
pub fn sample_covariance(x: &Matrix) -> Result<(Vec<f64>, SymMatrix)> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let p = x.cols();
    let means = column_means(x);
    let mut q = Matrix::zeros(p, p);
    let mut centred = vec![0.0; p];
    for k in 0..n {
        for ((c, &v), &mu) in centred.iter_mut().zip(x.row(k)).zip(&means) {
            *c = v - mu;
        }
        for i in 0..p {
            for j in i..p {
                q[(i, j)] += centred[i] * centred[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..p {
        for j in i..p {
            let v = q[(i, j)] / denom;
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    Ok((means, SymMatrix::from_matrix(q)?))
}

pub fn column_means(x: &Matrix) -> Vec<f64> {
    let mut sums = vec![0.0; x.cols()];
    for k in 0..x.rows() {
        for (s, &v) in sums.iter_mut().zip(x.row(k)) {
            *s += v;
        }
    }
    let n = x.rows() as f64;
    sums.into_iter().map(|s| s / n).collect()
}

/// Cross-covariance between the columns of `a` and `b` (same row count):
/// entry `(i, j)` is the unbiased covariance of `a[:, i]` and `b[:, j]`.
pub fn cross_covariance(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: b.rows(),
        });
    }
    let n = a.rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let ma = column_means(a);
    let mb = column_means(b);
    let mut out = Matrix::zeros(a.cols(), b.cols());
    for k in 0..n {
        let ra = a.row(k);
        let rb = b.row(k);
        for i in 0..a.cols() {
            let da = ra[i] - ma[i];
            for j in 0..b.cols() {
                out[(i, j)] += da * (rb[j] - mb[j]);
            }
        }
    }
    Ok(out.scale(1.0 / (n - 1) as f64))
}

/// Cross-correlation between the columns of `a` and `b`. Constant columns
/// produce zero correlation.
pub fn cross_correlation(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let cov = cross_covariance(a, b)?;
    let sd = |m: &Matrix| -> Result<Vec<f64>> {
        let c = cross_covariance(m, m)?;
        Ok(c.diagonal().into_iter().map(f64::sqrt).collect())
    };
    let sa = sd(a)?;
    let sb = sd(b)?;
    Ok(Matrix::from_fn(cov.rows(), cov.cols(), |i, j| {
        let denom = sa[i] * sb[j];
        if denom > 0.0 {
            cov[(i, j)] / denom
        } else {
            0.0
        }
    }))
}

/// Cholesky factor `L` (lower triangular) of a symmetric positive definite
/// matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    /// Factorises `a`. Pivots that are non-positive or below
    /// `n·ε·max(diag)` are reported as failures instead of being regularised.
    pub fn new(a: &SymMatrix) -> Result<Self> {
        let n = a.dim();
        let scale = (0..n).fold(0.0_f64, |m, i| m.max(a[(i, i)].abs()));
        let floor = n as f64 * f64::EPSILON * scale;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > floor) {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: diag,
                });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn ln_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// `bᵀ A⁻¹ b` via a single forward substitution.
    pub fn quadratic_form(&self, b: &[f64]) -> f64 {
        let y = self.forward(b);
        y.iter().map(|v| v * v).sum()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lower.rows();
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower[(k, i)] * x[k];
            }
            x[i] = s / self.lower[(i, i)];
        }
        x
    }

    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lower.rows();
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[(i, k)] * y[k];
            }
            y[i] = s / self.lower[(i, i)];
        }
        y
    }
}
