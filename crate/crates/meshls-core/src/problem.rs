//! Overdetermined least-squares instance generation.
//!
//! Three seeded families cover the convergence regimes the solvers care
//! about: plain Gaussian, singular-value-controlled conditioning, and
//! column-block-orthogonal instances on which the multisplitting iteration
//! contracts geometrically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{matvec, qr_decompose, LinalgError, Matrix, Vector};
use crate::partition::block_sizes;

/// Standard deviation of the measurement noise added to `b`.
pub const OBSERVATION_NOISE_STD: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid dimensions: need rows >= cols >= 1, got {rows}x{cols}")]
    InvalidDims { rows: usize, cols: usize },
    #[error("block-orthogonal generation needs 1 <= blocks <= cols, got {blocks} blocks for {cols} cols")]
    InvalidBlocks { blocks: usize, cols: usize },
    #[error("condition number must be >= 1, got {0}")]
    InvalidCondition(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Gaussian,
    /// Singular values log-spaced between 1 and `1/kappa`.
    Conditioned { kappa: f64 },
    /// Column blocks mutually orthogonal by construction.
    BlockOrthogonal { blocks: usize },
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    /// Accepts `gaussian`, `conditioned:KAPPA`, `block-orthogonal:BLOCKS`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let usage = "expected gaussian | conditioned:KAPPA | block-orthogonal:BLOCKS";
        match s.split_once(':') {
            None if s == "gaussian" => Ok(ProblemKind::Gaussian),
            Some(("conditioned", kappa)) => Ok(ProblemKind::Conditioned {
                kappa: kappa.parse().map_err(|_| format!("invalid kappa {kappa:?}"))?,
            }),
            Some(("block-orthogonal" | "block_orthogonal", blocks)) => Ok(ProblemKind::BlockOrthogonal {
                blocks: blocks.parse().map_err(|_| format!("invalid block count {blocks:?}"))?,
            }),
            _ => Err(format!("unknown problem kind {s:?}; {usage}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMeta {
    pub seed: u64,
    pub kind: ProblemKind,
    pub noise_std: f64,
    pub x_true: Vector,
}

/// The global system `A x ~ b` together with how it was generated (absent
/// for instances read from a file).
#[derive(Debug, Clone, PartialEq)]
pub struct LSProblem {
    pub matrix: Matrix,
    pub rhs: Vector,
    pub meta: Option<ProblemMeta>,
}

impl LSProblem {
    pub fn new(matrix: Matrix, rhs: Vector) -> Self {
        assert_eq!(matrix.rows(), rhs.len(), "rhs length must match row count");
        LSProblem { matrix, rhs, meta: None }
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| standard_normal(rng)).collect();
    Matrix::from_vec(rows, cols, data).expect("constructed length")
}

/// Generates a seeded instance: `b = A x_true + noise` with
/// `noise ~ N(0, 1e-3)` entrywise and a seeded Gaussian `x_true`.
pub fn generate_problem(m: usize, n: usize, seed: u64, kind: ProblemKind) -> Result<LSProblem, ProblemError> {
    if n == 0 || m < n {
        return Err(ProblemError::InvalidDims { rows: m, cols: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = match kind {
        ProblemKind::Gaussian => gaussian_matrix(&mut rng, m, n),
        ProblemKind::Conditioned { kappa } => {
            if kappa.is_nan() || kappa < 1.0 {
                return Err(ProblemError::InvalidCondition(kappa));
            }
            // A = U diag(s) V^T with orthonormal U (m x n) and V (n x n).
            let u = qr_decompose(&gaussian_matrix(&mut rng, m, n))?.q;
            let v = qr_decompose(&gaussian_matrix(&mut rng, n, n))?.q;
            let mut scaled = Matrix::zeros(m, n);
            for j in 0..n {
                let t = if n == 1 { 0.0 } else { j as f64 / (n - 1) as f64 };
                let s = kappa.powf(-t);
                for i in 0..m {
                    scaled[(i, j)] = u[(i, j)] * s;
                }
            }
            scaled.matmul(&v.transpose())?
        }
        ProblemKind::BlockOrthogonal { blocks } => {
            if blocks == 0 || blocks > n {
                return Err(ProblemError::InvalidBlocks { blocks, cols: n });
            }
            // Orthonormalize globally, then rotate and scale inside each
            // column block; cross-block products stay zero.
            let q = qr_decompose(&gaussian_matrix(&mut rng, m, n))?.q;
            let sizes = block_sizes(n, blocks);
            let mut out = Matrix::zeros(m, n);
            let mut offset = 0;
            for &width in &sizes {
                let rotation = qr_decompose(&gaussian_matrix(&mut rng, width, width))?.q;
                let scale = 0.5 + 1.5 * rng.random::<f64>();
                for i in 0..m {
                    for j in 0..width {
                        let mut acc = 0.0;
                        for k in 0..width {
                            acc += q[(i, offset + k)] * rotation[(k, j)];
                        }
                        out[(i, offset + j)] = scale * acc;
                    }
                }
                offset += width;
            }
            out
        }
    };
    let x_true = Vector::from_vec((0..n).map(|_| standard_normal(&mut rng)).collect());
    let mut rhs = matvec(&matrix, &x_true)?;
    for i in 0..m {
        rhs[i] += OBSERVATION_NOISE_STD * standard_normal(&mut rng);
    }
    Ok(LSProblem {
        matrix,
        rhs,
        meta: Some(ProblemMeta { seed, kind, noise_std: OBSERVATION_NOISE_STD, x_true }),
    })
}
