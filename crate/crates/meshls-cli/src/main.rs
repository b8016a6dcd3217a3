//! `meshls` — generate problems and topologies, run the distributed
//! solvers, and check the communication ledgers against the closed-form
//! cost models.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use meshls_core::cost::verify_costs;
use meshls_core::experiment::{run_experiment, ExperimentConfig, ProblemSource, SolverOptions, TopologySource};
use meshls_core::io::{write_problem, write_topology};
use meshls_core::mesh::{build_topology, TopologySpec};
use meshls_core::problem::{generate_problem, ProblemKind};
use meshls_core::report::{read_report, Algorithm, ReportFormat, SolverReport};

#[derive(Parser)]
#[command(name = "meshls", version, about = "Distributed least-squares workbench over a simulated mesh network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded least-squares instance and write it as a problem file.
    GenProblem(GenProblemArgs),
    /// Generate a connected topology and write it as a topology file.
    GenTopology(GenTopologyArgs),
    /// Run one solver and report measured vs analytic communication totals.
    Run(RunArgs),
    /// Check a stored report's ledger totals against its analytic channel.
    Verify(VerifyArgs),
    /// Pretty-print a stored report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenProblemArgs {
    /// Rows of the system (observations).
    #[arg(long)]
    m: usize,
    /// Columns of the system (unknowns).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// gaussian | conditioned:KAPPA | block-orthogonal:BLOCKS
    #[arg(long, default_value = "gaussian")]
    kind: String,
    /// Output problem file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenTopologyArgs {
    /// ring:N | path:N | grid:RxC | rgg:N:RADIUS[:SEED]
    #[arg(long)]
    spec: String,
    /// Seed for random topologies (overrides a seed in the spec).
    #[arg(long)]
    seed: Option<u64>,
    /// Output topology file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// dms | dmcgls | dlms | drls
    #[arg(long)]
    algorithm: Algorithm,
    /// Problem file path, or gen:MxN:KIND to generate (seeded by --seed).
    #[arg(long)]
    problem: String,
    /// Topology file path or an inline spec (ring:N, path:N, grid:RxC, rgg:N:R).
    #[arg(long)]
    topology: String,
    /// Convergence tolerance (relative normal-equation residual).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Consensus-LMS step size.
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Consensus-LMS penalty coefficient.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Consensus-LMS reception-noise std-dev.
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
    /// Consensus-LMS spread tolerance.
    #[arg(long, default_value_t = 1e-3)]
    tol_consensus: f64,
    /// Consensus-LMS oracle-proximity tolerance.
    #[arg(long, default_value_t = 1e-2)]
    tol_solution: f64,
    /// Incremental-RLS forgetting factor.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Incremental-RLS prior scale (P0 = (1/eps) I).
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Seed for generated problems and noise streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report JSON produced by `run`.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON produced by `run`.
    #[arg(long)]
    report: PathBuf,
    /// Write the rendered summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenProblem(args) => gen_problem(args),
        Command::GenTopology(args) => gen_topology(args),
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Report(args) => report(args),
    }
}

fn gen_problem(args: GenProblemArgs) -> Result<ExitCode> {
    let kind: ProblemKind = args.kind.parse().map_err(anyhow::Error::msg)?;
    let problem = generate_problem(args.m, args.n, args.seed, kind)?;
    write_problem(&problem, &args.out)?;
    println!("wrote {}x{} problem (seed {}) to {}", args.m, args.n, args.seed, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn gen_topology(args: GenTopologyArgs) -> Result<ExitCode> {
    let mut spec: TopologySpec = args.spec.parse().map_err(anyhow::Error::msg)?;
    if let (TopologySpec::RandomGeometric { seed, .. }, Some(s)) = (&mut spec, args.seed) {
        *seed = s;
    }
    let net = build_topology(&spec)?;
    write_topology(&net, &args.out)?;
    println!(
        "wrote {}-node topology ({} edges, d_max {}) to {}",
        net.n_nodes(),
        net.edges().len(),
        net.d_max(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_problem_source(raw: &str, seed: u64) -> Result<ProblemSource> {
    if let Some(rest) = raw.strip_prefix("gen:") {
        let (dims, kind) = rest.split_once(':').unwrap_or((rest, "gaussian"));
        let (m, n) = dims
            .split_once('x')
            .with_context(|| format!("expected gen:MxN[:KIND], got {raw:?}"))?;
        return Ok(ProblemSource::Generate {
            m: m.parse().with_context(|| format!("invalid m {m:?}"))?,
            n: n.parse().with_context(|| format!("invalid n {n:?}"))?,
            seed,
            kind: kind.parse::<ProblemKind>().map_err(anyhow::Error::msg)?,
        });
    }
    Ok(ProblemSource::File(PathBuf::from(raw)))
}

fn parse_topology_source(raw: &str) -> TopologySource {
    match raw.parse::<TopologySpec>() {
        Ok(spec) => TopologySource::Spec(spec),
        Err(_) => TopologySource::File(PathBuf::from(raw)),
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let format = args.format.parse::<ReportFormat>().map_err(anyhow::Error::msg)?;
    let config = ExperimentConfig {
        algorithm: args.algorithm,
        problem: parse_problem_source(&args.problem, args.seed)?,
        topology: parse_topology_source(&args.topology),
        solver: SolverOptions {
            tol: args.tol,
            max_iter: args.max_iter,
            mu: args.mu,
            c: args.c,
            noise_std: args.noise_std,
            tol_consensus: args.tol_consensus,
            tol_solution: args.tol_solution,
            lambda: args.lambda,
            eps: args.eps,
            seed: args.seed,
        },
        out: args.out.clone(),
        format,
    };
    let report = run_experiment(&config)?;
    print!("{}", render_summary(&report));
    print!("{}", verify_costs(&report));
    if let Some(out) = &args.out {
        println!("report written to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let report = read_report(&args.report)?;
    let verdict = verify_costs(&report);
    print!("{verdict}");
    if verdict.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        bail!("measured ledger totals do not match the analytic formulas");
    }
}

fn report(args: ReportArgs) -> Result<ExitCode> {
    let report = read_report(&args.report)?;
    let mut body = render_summary(&report);
    body.push_str(&format!("{}", verify_costs(&report)));
    match &args.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn render_summary(report: &SolverReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("algorithm      {}\n", report.algorithm));
    out.push_str(&format!("iterations     {}\n", report.k));
    out.push_str(&format!("converged      {}\n", report.converged));
    if let Some(last) = report.residual_history.last() {
        out.push_str(&format!("residual       {last:e}\n"));
    }
    out.push_str(&format!(
        "measured       cost {} / time {} (setup {})\n",
        report.measured.cost_units, report.measured.time_units, report.measured.setup_cost_units
    ));
    out.push_str(&format!(
        "analytic       cost {} / time {}\n",
        report.analytic.cost, report.analytic.time
    ));
    for note in &report.errata_notes {
        out.push_str(&format!("note           {note}\n"));
    }
    out
}
