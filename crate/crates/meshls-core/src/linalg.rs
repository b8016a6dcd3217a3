//! Dense linear-algebra kernels and the centralized least-squares oracle.
//!
//! Everything here is plain `f64` row-major storage. The instances this
//! workbench deals with are desk-scale, so no attempt is made at blocking,
//! SIMD or sparsity; determinism and testability win over throughput.

use thiserror::Error;

/// Relative tolerance (against the largest column norm) below which a
/// diagonal entry of `R` is treated as a rank deficiency.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },
    #[error("matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("{op}: invalid argument: {msg}")]
    InvalidArgument { op: &'static str, msg: String },
}

fn dim_err(op: &'static str, expected: impl ToString, got: impl ToString) -> LinalgError {
    LinalgError::DimensionMismatch {
        op,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

/// Dense row-major matrix. Entries are expected to stay finite; parsers and
/// generators enforce that at the boundary, `all_finite` lets callers check.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data; the length must be `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(dim_err(
                "Matrix::from_vec",
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Convenience constructor for literal matrices in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copy of the `height` rows starting at `row_offset`.
    pub fn row_block(&self, row_offset: usize, height: usize) -> Matrix {
        assert!(row_offset + height <= self.rows);
        let data = self.data[row_offset * self.cols..(row_offset + height) * self.cols].to_vec();
        Matrix { rows: height, cols: self.cols, data }
    }

    /// Copy of the `width` columns starting at `col_offset`.
    pub fn col_block(&self, col_offset: usize, width: usize) -> Matrix {
        assert!(col_offset + width <= self.cols);
        let mut data = Vec::with_capacity(self.rows * width);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[col_offset..col_offset + width]);
        }
        Matrix { rows: self.rows, cols: width, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(dim_err("matmul", format!("lhs.cols = {}", self.cols), format!("rhs.rows = {}", other.rows)));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a_ik = self[(i, k)];
                if a_ik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a_ik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest Euclidean column norm; reference scale for rank tests.
    pub fn max_col_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)] * self[(i, j)]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Dense vector of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Vector { data: vec![0.0; len] }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Vector { data }
    }

    pub fn from_slice(data: &[f64]) -> Self {
        Vector { data: data.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Vector) {
        assert_eq!(self.len(), other.len(), "axpy: length mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector { data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn slice(&self, offset: usize, len: usize) -> Vector {
        Vector { data: self.data[offset..offset + len].to_vec() }
    }

    /// Concatenates pieces in order.
    pub fn concat(pieces: &[Vector]) -> Vector {
        let mut data = Vec::with_capacity(pieces.iter().map(Vector::len).sum());
        for p in pieces {
            data.extend_from_slice(&p.data);
        }
        Vector { data }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector { data }
    }
}

/// `A x` for an `m x n` matrix and a length-`n` vector.
pub fn matvec(a: &Matrix, x: &Vector) -> Result<Vector, LinalgError> {
    if a.cols() != x.len() {
        return Err(dim_err("matvec", format!("x.len = {}", a.cols()), format!("x.len = {}", x.len())));
    }
    let mut out = Vector::zeros(a.rows());
    for i in 0..a.rows() {
        let mut acc = 0.0;
        for (aij, xj) in a.row(i).iter().zip(x.iter()) {
            acc += aij * xj;
        }
        out[i] = acc;
    }
    Ok(out)
}

/// `A^T y` for an `m x n` matrix and a length-`m` vector.
pub fn matvec_t(a: &Matrix, y: &Vector) -> Result<Vector, LinalgError> {
    if a.rows() != y.len() {
        return Err(dim_err("matvec_t", format!("y.len = {}", a.rows()), format!("y.len = {}", y.len())));
    }
    let mut out = Vector::zeros(a.cols());
    for i in 0..a.rows() {
        let yi = y[i];
        if yi == 0.0 {
            continue;
        }
        for (j, aij) in a.row(i).iter().enumerate() {
            out[j] += aij * yi;
        }
    }
    Ok(out)
}

/// Thin QR factorization: `Q` is `m x n` with orthonormal columns, `R` is
/// `n x n` upper triangular with a non-negative diagonal.
#[derive(Debug, Clone)]
pub struct QRFactors {
    pub q: Matrix,
    pub r: Matrix,
}

impl QRFactors {
    /// Least-squares solve through the stored factors: `x = R^{-1} Q^T b`.
    pub fn solve_ls(&self, b: &Vector) -> Result<Vector, LinalgError> {
        if b.len() != self.q.rows() {
            return Err(dim_err("QRFactors::solve_ls", format!("b.len = {}", self.q.rows()), format!("b.len = {}", b.len())));
        }
        let qtb = matvec_t(&self.q, b)?;
        back_substitute(&self.r, &qtb)
    }
}

/// Solves the upper-triangular system `R x = y`.
fn back_substitute(r: &Matrix, y: &Vector) -> Result<Vector, LinalgError> {
    let n = r.cols();
    let mut x = Vector::zeros(n);
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * x[j];
        }
        if r[(i, i)] == 0.0 {
            return Err(LinalgError::RankDeficient { column: i });
        }
        x[i] = acc / r[(i, i)];
    }
    Ok(x)
}

/// Householder QR of an `m x n` matrix with `m >= n` and full column rank.
///
/// A column whose remaining norm falls below `RANK_TOL` times the largest
/// column norm of the input is reported as a rank deficiency.
pub fn qr_decompose(a: &Matrix) -> Result<QRFactors, LinalgError> {
    let m = a.rows();
    let n = a.cols();
    if m < n {
        return Err(dim_err("qr_decompose", format!("rows >= cols ({n})"), format!("rows = {m}")));
    }
    let scale = a.max_col_norm();
    let mut work = a.clone();
    // One reflector per column, stored as the full-length v with zeros above
    // the pivot; H_j = I - 2 v v^T / (v^T v).
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let col_norm = (j..m).map(|i| work[(i, j)] * work[(i, j)]).sum::<f64>().sqrt();
        if col_norm <= RANK_TOL * scale {
            return Err(LinalgError::RankDeficient { column: j });
        }
        let pivot = work[(j, j)];
        let alpha = if pivot >= 0.0 { -col_norm } else { col_norm };
        let mut v = vec![0.0; m];
        v[j] = pivot - alpha;
        for i in j + 1..m {
            v[i] = work[(i, j)];
        }
        let vtv: f64 = v[j..].iter().map(|t| t * t).sum();
        if vtv > 0.0 {
            for col in j..n {
                let mut proj = 0.0;
                for i in j..m {
                    proj += v[i] * work[(i, col)];
                }
                let coef = 2.0 * proj / vtv;
                for i in j..m {
                    work[(i, col)] -= coef * v[i];
                }
            }
        }
        work[(j, j)] = alpha;
        reflectors.push(v);
    }

    // R: upper n x n block, exact zeros below the diagonal.
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = work[(i, j)];
        }
    }

    // Thin Q: apply the reflectors, last first, to the leading columns of I.
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for j in (0..n).rev() {
        let v = &reflectors[j];
        let vtv: f64 = v[j..].iter().map(|t| t * t).sum();
        if vtv == 0.0 {
            continue;
        }
        for col in 0..n {
            let mut proj = 0.0;
            for i in j..m {
                proj += v[i] * q[(i, col)];
            }
            let coef = 2.0 * proj / vtv;
            for i in j..m {
                q[(i, col)] -= coef * v[i];
            }
        }
    }

    // Normalize to a non-negative diagonal of R.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for col in j..n {
                r[(j, col)] = -r[(j, col)];
            }
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(QRFactors { q, r })
}

/// `argmin_x ||A x - b||_2` by Householder QR.
pub fn solve_ls_direct(a: &Matrix, b: &Vector) -> Result<Vector, LinalgError> {
    if b.len() != a.rows() {
        return Err(dim_err("solve_ls_direct", format!("b.len = {}", a.rows()), format!("b.len = {}", b.len())));
    }
    qr_decompose(a)?.solve_ls(b)
}

/// `argmin_x ||A x - b||^2 + eps ||x - prior||^2` via the augmented system
/// `[A; sqrt(eps) I] x ~ [b; sqrt(eps) prior]`. `A` may have zero rows.
pub fn solve_ridge(a: &Matrix, b: &Vector, eps: f64, prior: &Vector) -> Result<Vector, LinalgError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(LinalgError::InvalidArgument { op: "solve_ridge", msg: format!("eps must be positive, got {eps}") });
    }
    let n = a.cols();
    if b.len() != a.rows() {
        return Err(dim_err("solve_ridge", format!("b.len = {}", a.rows()), format!("b.len = {}", b.len())));
    }
    if prior.len() != n {
        return Err(dim_err("solve_ridge", format!("prior.len = {n}"), format!("prior.len = {}", prior.len())));
    }
    let s = eps.sqrt();
    let mut aug = Matrix::zeros(a.rows() + n, n);
    for i in 0..a.rows() {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
    }
    for j in 0..n {
        aug[(a.rows() + j, j)] = s;
    }
    let mut rhs = Vector::zeros(a.rows() + n);
    for i in 0..a.rows() {
        rhs[i] = b[i];
    }
    for j in 0..n {
        rhs[a.rows() + j] = s * prior[j];
    }
    solve_ls_direct(&aug, &rhs)
}

/// Cholesky factor `L` with `A = L L^T`, or an error when `A` is not
/// (numerically) symmetric positive definite. Used by observers to check
/// positive definiteness of covariance surrogates.
pub fn cholesky(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(dim_err("cholesky", "square matrix", format!("{}x{}", a.rows(), a.cols())));
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(LinalgError::InvalidArgument { op: "cholesky", msg: format!("not positive definite at pivot {i}") });
                }
                l[(i, j)] = acc.sqrt();
            } else {
                l[(i, j)] = acc / l[(j, j)];
            }
        }
    }
    Ok(l)
}
