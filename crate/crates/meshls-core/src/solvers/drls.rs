//! Recursive least squares, centralized and relocated along a Hamiltonian
//! path.
//!
//! The incremental run walks the path once; each node absorbs its own rows
//! through the same rank-one recursion the centralized procedure uses, then
//! hands the state `(x, P)` — `n + n^2` scalars — to its successor. The
//! computation is identical arithmetic, merely relocated, so the result
//! matches the centralized recursion on the path-ordered row stream
//! bit-for-bit.
//!
//! With forgetting factor 1 and state prior `P0 = (1/eps) I` the recursion
//! computes the ridge solution `argmin ||Ax-b||^2 + eps ||x - prior||^2`
//! exactly, independent of row order; with forgetting below 1 older rows
//! are discounted and order matters.

use crate::cost::{analytic_totals, CostParams};
use crate::ledger::CostLedger;
use crate::linalg::{Matrix, Vector};
use crate::mesh::MeshNetwork;
use crate::partition::row_partition;
use crate::problem::LSProblem;
use crate::report::{Algorithm, AnalyticTotals, ReportExtras, SolverReport};
use crate::solvers::{relative_normal_residual, LedgerBaseline, SolverError};

#[derive(Debug, Clone)]
pub struct RlsConfig {
    /// Forgetting factor in `(0, 1]`.
    pub lambda: f64,
    /// Inverse scale of the state prior: `P0 = (1/eps) I`. Small values
    /// approach the plain least-squares solution; `1.0` reproduces the
    /// literal unit-prior recursion.
    pub eps: f64,
    /// Prior estimate; zero when absent.
    pub prior: Option<Vector>,
}

impl Default for RlsConfig {
    fn default() -> Self {
        RlsConfig { lambda: 1.0, eps: 1e-10, prior: None }
    }
}

impl RlsConfig {
    fn validate(&self) -> Result<(), SolverError> {
        let in_unit_interval = self.lambda > 0.0 && self.lambda <= 1.0; // false for NaN
        if !in_unit_interval {
            return Err(SolverError::Config(format!("lambda must be in (0, 1], got {}", self.lambda)));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(SolverError::Config(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

/// The traveling state: estimate and inverse-covariance surrogate.
#[derive(Debug, Clone)]
pub struct RlsState {
    pub x: Vector,
    pub p: Matrix,
    /// Largest off-symmetry observed in `P` before re-symmetrization,
    /// relative to the magnitude of the update's operands (an absolute
    /// bound is meaningless when `P0 = (1/eps) I` starts at 1e10).
    pub max_asymmetry: f64,
}

impl RlsState {
    pub fn new(n: usize, eps: f64, prior: Option<&Vector>) -> Self {
        let x = prior.cloned().unwrap_or_else(|| Vector::zeros(n));
        assert_eq!(x.len(), n, "prior length must match the unknown count");
        RlsState { x, p: Matrix::identity(n).scale(1.0 / eps), max_asymmetry: 0.0 }
    }

    /// Absorbs one observation row with weight `weight`: gain, estimate and
    /// covariance update, then re-symmetrization of `P`.
    pub fn absorb(&mut self, row: &[f64], observation: f64, lambda: f64, weight: f64) {
        let n = self.x.len();
        debug_assert_eq!(row.len(), n);
        // pi = lambda^{-1} P a
        let pi: Vec<f64> = (0..n)
            .map(|i| {
                let acc: f64 = self.p.row(i).iter().zip(row).map(|(p, a)| p * a).sum();
                acc / lambda
            })
            .collect();
        let a_dot_pi: f64 = row.iter().zip(&pi).map(|(a, p)| a * p).sum();
        let denom = 1.0 / weight + a_dot_pi;
        let gain: Vec<f64> = pi.iter().map(|v| v / denom).collect();

        let prediction: f64 = row.iter().zip(self.x.iter()).map(|(a, x)| a * x).sum();
        let error = observation - prediction;
        for (x, g) in self.x.as_mut_slice().iter_mut().zip(&gain) {
            *x += g * error;
        }

        // P <- lambda^{-1} P - g pi^T, then symmetrize. The asymmetry noise
        // floor is set by the subtraction operands, which dwarf the result
        // while the huge prior is being cancelled away.
        let operand_scale = (self.p.max_abs() / lambda).max(1.0);
        let mut updated = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                updated[(i, j)] = self.p[(i, j)] / lambda - gain[i] * pi[j];
            }
        }
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                asym = asym.max((updated[(i, j)] - updated[(j, i)]).abs());
                let mean = 0.5 * (updated[(i, j)] + updated[(j, i)]);
                updated[(i, j)] = mean;
                updated[(j, i)] = mean;
            }
        }
        self.max_asymmetry = self.max_asymmetry.max(asym / operand_scale);
        self.p = updated;
    }
}

/// Classic sequential RLS over the rows of `(a, b)` in storage order, all
/// with unit weight.
pub fn rls_centralized(a: &Matrix, b: &Vector, config: &RlsConfig) -> Result<RlsState, SolverError> {
    config.validate()?;
    if b.len() != a.rows() {
        return Err(SolverError::Config(format!(
            "rhs length {} does not match row count {}",
            b.len(),
            a.rows()
        )));
    }
    let mut state = RlsState::new(a.cols(), config.eps, config.prior.as_ref());
    for i in 0..a.rows() {
        state.absorb(a.row(i), b[i], config.lambda, 1.0);
    }
    Ok(state)
}

#[derive(Debug, Clone, Default)]
pub struct DrlsConfig {
    pub rls: RlsConfig,
    /// Per-node observation weights, unit when absent.
    pub node_weights: Option<Vec<f64>>,
}

pub fn run(
    problem: &LSProblem,
    net: &MeshNetwork,
    config: &DrlsConfig,
    ledger: &mut CostLedger,
) -> Result<SolverReport, SolverError> {
    run_traced(problem, net, config, ledger).map(|(report, _)| report)
}

/// One pass over the Hamiltonian path. Returns the final traveling state
/// alongside the report so observers can inspect `P`.
pub fn run_traced(
    problem: &LSProblem,
    net: &MeshNetwork,
    config: &DrlsConfig,
    ledger: &mut CostLedger,
) -> Result<(SolverReport, RlsState), SolverError> {
    config.rls.validate()?;
    let path = net.hamiltonian_path().ok_or(SolverError::HamiltonianPathMissing)?.to_vec();
    let n_nodes = net.n_nodes();
    if let Some(weights) = &config.node_weights {
        if weights.len() != n_nodes {
            return Err(SolverError::Config(format!(
                "expected {} node weights, got {}",
                n_nodes,
                weights.len()
            )));
        }
        if !weights.iter().all(|&w| w > 0.0) {
            return Err(SolverError::Config("node weights must be positive".into()));
        }
    }
    let baseline = LedgerBaseline::capture(ledger);
    let rows = row_partition(problem, n_nodes)?;
    let n = problem.cols();
    let hop_payload = n + n * n;

    let mut state = RlsState::new(n, config.rls.eps, config.rls.prior.as_ref());
    for (position, &node) in path.iter().enumerate() {
        let block = &rows.blocks[node];
        let weight = config.node_weights.as_ref().map_or(1.0, |w| w[node]);
        for i in 0..block.matrix.rows() {
            state.absorb(block.matrix.row(i), block.rhs[i], config.rls.lambda, weight);
        }
        if position + 1 < path.len() {
            ledger.record_path_hop(net, node, path[position + 1], hop_payload, "drls.state-handoff")?;
        }
    }

    let params = CostParams {
        k: 1,
        m: problem.rows() as u64,
        n: n as u64,
        n_nodes: n_nodes as u64,
        sum_deg: net.sum_deg() as u64,
        d_max: net.d_max() as u64,
    };
    let (cost, time) = analytic_totals(Algorithm::Drls, &params);
    let residual = relative_normal_residual(&problem.matrix, &problem.rhs, &state.x);
    let report = SolverReport {
        algorithm: Algorithm::Drls,
        // A single pass; the hop count is fixed by the network size.
        k: 1,
        residual_history: vec![residual],
        final_x: state.x.clone(),
        per_node_x: None,
        converged: true,
        measured: baseline.measured(ledger),
        analytic: AnalyticTotals { cost, time },
        errata_notes: Vec::new(),
        extras: ReportExtras {
            cost_params: Some(params),
            iteration_totals: vec![baseline.delta(ledger)],
        },
    };
    Ok((report, state))
}
