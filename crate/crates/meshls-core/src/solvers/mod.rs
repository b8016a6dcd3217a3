//! The four distributed solvers, each written as per-node state machines
//! driven by synchronized communication rounds over the simulated mesh.
//!
//! Convergence tests are performed by an omniscient observer and charged
//! zero communication; the ledgers bill algorithmic messages only.

pub mod dlms;
pub mod dmcgls;
pub mod dms;
pub mod drls;

use thiserror::Error;

use crate::ledger::CostLedger;
use crate::linalg::{matvec, matvec_t, LinalgError, Matrix, Vector};
use crate::mesh::MeshError;
use crate::partition::PartitionError;
use crate::report::MeasuredTotals;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("conjugate-gradient breakdown at iteration {iteration}: search direction annihilated")]
    Breakdown { iteration: usize },
    #[error("estimates diverged at iteration {iteration} with mu = {mu}, c = {c}; reduce the step size")]
    Diverged { mu: f64, c: f64, iteration: usize },
    #[error("the incremental solver requires a topology with a hamiltonian path")]
    HamiltonianPathMissing,
}

/// Relative normal-equation residual `||A^T (b - A x)|| / ||A^T b||`, the
/// observer-side convergence diagnostic shared by all solvers. Falls back
/// to the absolute norm when `A^T b` is zero.
pub fn relative_normal_residual(a: &Matrix, b: &Vector, x: &Vector) -> f64 {
    let residual = b.sub(&matvec(a, x).expect("observer dims"));
    let gradient = matvec_t(a, &residual).expect("observer dims");
    let denom = matvec_t(a, b).expect("observer dims").norm2();
    if denom == 0.0 {
        gradient.norm2()
    } else {
        gradient.norm2() / denom
    }
}

/// Relative difference `||a - b|| / ||b||` (absolute when `b` is zero).
pub fn relative_diff(a: &Vector, b: &Vector) -> f64 {
    let diff = a.sub(b).norm2();
    let denom = b.norm2();
    if denom == 0.0 {
        diff
    } else {
        diff / denom
    }
}

/// Ledger totals at solver entry; lets measured channels report deltas even
/// if a caller hands in a ledger with prior traffic.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LedgerBaseline {
    cost: u64,
    time: u64,
    setup: u64,
}

impl LedgerBaseline {
    pub(crate) fn capture(ledger: &CostLedger) -> Self {
        LedgerBaseline {
            cost: ledger.cost_units(),
            time: ledger.time_units(),
            setup: ledger.setup_cost_units(),
        }
    }

    /// Cumulative `(cost, time)` within the run.
    pub(crate) fn delta(&self, ledger: &CostLedger) -> (u64, u64) {
        (ledger.cost_units() - self.cost, ledger.time_units() - self.time)
    }

    pub(crate) fn measured(&self, ledger: &CostLedger) -> MeasuredTotals {
        let (cost_units, time_units) = self.delta(ledger);
        MeasuredTotals {
            cost_units,
            time_units,
            setup_cost_units: ledger.setup_cost_units() - self.setup,
        }
    }
}
