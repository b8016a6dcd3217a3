//! Distributed least-squares workbench.
//!
//! Four distributed iterative solvers for overdetermined systems
//! `A x ~ b` run as node state machines over a simulated multi-hop mesh:
//!
//! * `dms` — multisplitting over column blocks, one correction flood per
//!   iteration;
//! * `dmcgls` — conjugate gradient on the normal equations with batched
//!   partial-reduction floods;
//! * `dlms` — neighborhood-consensus least-mean-squares, broadcasts and
//!   per-neighbor unicasts only;
//! * `drls` — recursive least squares relocated along a Hamiltonian path.
//!
//! Every transmission is recorded in a [`ledger::CostLedger`] under unit
//! link bandwidth and one radio per node, and runs are checked both against
//! a direct QR oracle (numerics) and closed-form cost/time models
//! ([`cost`]) that the ledgers must reproduce exactly.

pub mod cost;
pub mod experiment;
pub mod io;
pub mod ledger;
pub mod linalg;
pub mod mesh;
pub mod partition;
pub mod problem;
pub mod report;
pub mod solvers;

pub use experiment::{run_experiment, ExperimentConfig, ProblemSource, SolverOptions, TopologySource};
pub use report::{Algorithm, SolverReport};
