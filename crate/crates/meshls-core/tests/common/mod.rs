//! Independent oracles shared by the integration tests. Everything here is
//! deliberately naive (triple loops, normal equations, Gaussian elimination)
//! and stays off the code paths it is used to check.

#![allow(dead_code)]
// Oracle code is written in flat index style on purpose.
#![allow(clippy::needless_range_loop)]

use meshls_core::linalg::{Matrix, Vector};
use meshls_core::partition::block_sizes;

/// Entrywise matrix-vector product, the brute-force way.
pub fn naive_matvec(a: &Matrix, x: &Vector) -> Vec<f64> {
    let mut out = vec![0.0; a.rows()];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[i] += a[(i, j)] * x[j];
        }
    }
    out
}

/// Solves a dense square system by Gaussian elimination with partial
/// pivoting. Panics on a (numerically) singular system.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut aug: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        assert!(aug[pivot][col].abs() > 1e-14, "singular system in test oracle");
        aug.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = aug[row][col] / aug[col][col];
            for k in col..n {
                aug[row][k] -= f * aug[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= aug[row][k] * x[k];
        }
        x[row] = acc / aug[row][row];
    }
    x
}

/// Least squares by the normal equations `(A^T A) x = A^T b`, solved with
/// Gaussian elimination.
pub fn normal_equations_solve(a: &Matrix, b: &Vector) -> Vec<f64> {
    let n = a.cols();
    let mut gram = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..a.rows() {
                gram[i][j] += a[(k, i)] * a[(k, j)];
            }
        }
        for k in 0..a.rows() {
            rhs[i] += a[(k, i)] * b[k];
        }
    }
    gauss_solve(&gram, &rhs)
}

/// Centralized replay of the damped block-Jacobi recurrence over column
/// blocks: every block solves its local least-squares problem against
/// `b - A x + Acol_u x_u` built from the previous iterate, then all blocks
/// step simultaneously by `alpha`. Local solves go through the normal
/// equations, an independent route from the solver's cached QR.
///
/// Returns the concatenated iterate after each of `iters` iterations.
pub fn damped_block_jacobi(a: &Matrix, b: &Vector, blocks: usize, alpha: f64, iters: usize) -> Vec<Vec<f64>> {
    let n = a.cols();
    let sizes = block_sizes(n, blocks);
    let mut offsets = vec![0usize];
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let mut x = vec![0.0; n];
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        let ax = naive_matvec(a, &Vector::from_slice(&x));
        let mut next = x.clone();
        for u in 0..blocks {
            let width = sizes[u];
            let offset = offsets[u];
            let block = a.col_block(offset, width);
            // Local right-hand side b - A x + Acol_u x_u from scratch.
            let own = naive_matvec(&block, &Vector::from_slice(&x[offset..offset + width]));
            let mut local_rhs = Vector::zeros(a.rows());
            for i in 0..a.rows() {
                local_rhs[i] = b[i] - ax[i] + own[i];
            }
            let y = normal_equations_solve(&block, &local_rhs);
            for j in 0..width {
                next[offset + j] = x[offset + j] + alpha * (y[j] - x[offset + j]);
            }
        }
        x = next;
        history.push(x.clone());
    }
    history
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
