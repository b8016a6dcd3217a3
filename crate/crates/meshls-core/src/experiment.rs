//! Experiment orchestration: problem and topology acquisition, solver
//! dispatch, cost verification and report emission in one call.

use std::path::PathBuf;

use thiserror::Error;

use crate::io::{read_problem, read_topology, FileFormatError};
use crate::ledger::CostLedger;
use crate::linalg::Vector;
use crate::mesh::{build_topology, MeshError, MeshNetwork, TopologySpec};
use crate::problem::{generate_problem, LSProblem, ProblemError, ProblemKind};
use crate::report::{emit_report, Algorithm, ReportError, ReportFormat, SolverReport};
use crate::solvers::{dlms, dmcgls, dms, drls, SolverError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    File(#[from] FileFormatError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("invalid experiment: {0}")]
    Config(String),
}

#[derive(Debug, Clone)]
pub enum ProblemSource {
    File(PathBuf),
    Generate { m: usize, n: usize, seed: u64, kind: ProblemKind },
}

#[derive(Debug, Clone)]
pub enum TopologySource {
    Spec(TopologySpec),
    File(PathBuf),
}

/// Solver knobs, shared across algorithms; each solver picks the fields it
/// understands.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub mu: f64,
    pub c: f64,
    pub noise_std: f64,
    pub tol_consensus: f64,
    pub tol_solution: f64,
    pub lambda: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 1000,
            mu: 0.01,
            c: 1.0,
            noise_std: 0.0,
            tol_consensus: 1e-3,
            tol_solution: 1e-2,
            lambda: 1.0,
            eps: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub problem: ProblemSource,
    pub topology: TopologySource,
    pub solver: SolverOptions,
    /// When set, the report is written here in `format`.
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

/// Builds the inputs, runs the selected solver on a fresh ledger, and
/// writes the report when an output path is configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SolverReport, HarnessError> {
    let net = match &config.topology {
        TopologySource::Spec(spec) => build_topology(spec)?,
        TopologySource::File(path) => read_topology(path)?,
    };
    let problem = load_problem(&config.problem, config.algorithm, net.n_nodes())?;
    let mut ledger = CostLedger::new();
    let report = dispatch(config, &problem, &net, &mut ledger)?;
    if let Some(out) = &config.out {
        emit_report(&report, config.format, out)?;
    }
    Ok(report)
}

fn load_problem(source: &ProblemSource, algorithm: Algorithm, n_nodes: usize) -> Result<LSProblem, HarnessError> {
    match source {
        ProblemSource::File(path) => Ok(read_problem(path)?),
        ProblemSource::Generate { m, n, seed, kind } => {
            if !(*m >= *n && *n >= 1 && *m >= n_nodes) {
                return Err(HarnessError::Config(format!(
                    "generated problems need m >= n >= 1 and m >= N, got m = {m}, n = {n}, N = {n_nodes}"
                )));
            }
            // Only the column-partitioned algorithms need a column per node.
            let needs_col_blocks = matches!(algorithm, Algorithm::Dms | Algorithm::Dmcgls);
            if needs_col_blocks && *n < n_nodes {
                return Err(HarnessError::Config(format!(
                    "{algorithm} needs n >= N to give every node a column block, got n = {n}, N = {n_nodes}"
                )));
            }
            Ok(generate_problem(*m, *n, *seed, *kind)?)
        }
    }
}

fn dispatch(
    config: &ExperimentConfig,
    problem: &LSProblem,
    net: &MeshNetwork,
    ledger: &mut CostLedger,
) -> Result<SolverReport, HarnessError> {
    let opts = &config.solver;
    let report = match config.algorithm {
        Algorithm::Dms => dms::run(
            problem,
            net,
            &dms::DmsConfig { tol: opts.tol, max_iter: opts.max_iter },
            ledger,
        )?,
        Algorithm::Dmcgls => dmcgls::run(
            problem,
            net,
            &dmcgls::McglsConfig { tol: opts.tol, max_iter: opts.max_iter },
            ledger,
        )?,
        Algorithm::Dlms => dlms::run(
            problem,
            net,
            &dlms::DlmsConfig {
                mu: opts.mu,
                c: opts.c,
                noise_std: opts.noise_std,
                tol_consensus: opts.tol_consensus,
                tol_solution: opts.tol_solution,
                max_iter: opts.max_iter,
                seed: opts.seed,
            },
            ledger,
        )?,
        Algorithm::Drls => drls::run(
            problem,
            net,
            &drls::DrlsConfig {
                rls: drls::RlsConfig { lambda: opts.lambda, eps: opts.eps, prior: None },
                node_weights: None,
            },
            ledger,
        )?,
    };
    Ok(report)
}

/// Direct oracle for cross-checking any report against its problem.
pub fn oracle_solution(problem: &LSProblem) -> Result<Vector, HarnessError> {
    Ok(crate::linalg::solve_ls_direct(&problem.matrix, &problem.rhs).map_err(SolverError::from)?)
}
