//! Solver run reports and their JSON/CSV serializations.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::CostParams;
use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "dms")]
    Dms,
    #[serde(rename = "dmcgls")]
    Dmcgls,
    #[serde(rename = "dlms")]
    Dlms,
    #[serde(rename = "drls")]
    Drls,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Dms, Algorithm::Dmcgls, Algorithm::Dlms, Algorithm::Drls];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Dms => "dms",
            Algorithm::Dmcgls => "dmcgls",
            Algorithm::Dlms => "dlms",
            Algorithm::Drls => "drls",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dms" => Ok(Algorithm::Dms),
            "dmcgls" => Ok(Algorithm::Dmcgls),
            "dlms" => Ok(Algorithm::Dlms),
            "drls" => Ok(Algorithm::Drls),
            other => Err(format!("unknown algorithm {other:?} (expected dms|dmcgls|dlms|drls)")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ledger totals observed during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeasuredTotals {
    pub cost_units: u64,
    pub time_units: u64,
    pub setup_cost_units: u64,
}

/// Closed-form totals predicted by the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AnalyticTotals {
    pub cost: u64,
    pub time: u64,
}

/// Live-run data that is not part of the serialized report: the parameters
/// the cost evaluators need and cumulative ledger totals per iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportExtras {
    pub cost_params: Option<CostParams>,
    pub iteration_totals: Vec<(u64, u64)>,
}

/// Outcome of one solver run: iterate diagnostics plus the measured and
/// analytic communication channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub algorithm: Algorithm,
    /// Iterations executed (for the incremental solver: one pass).
    pub k: usize,
    /// Relative normal-equation residual after each iteration.
    pub residual_history: Vec<f64>,
    pub final_x: Vector,
    /// Per-node estimates, populated by the consensus solver.
    pub per_node_x: Option<Vec<Vector>>,
    pub converged: bool,
    pub measured: MeasuredTotals,
    pub analytic: AnalyticTotals,
    pub errata_notes: Vec<String>,
    pub extras: ReportExtras,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report contains non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("CSV emission needs per-iteration ledger totals from a live run")]
    MissingIterationTotals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected json|csv)")),
        }
    }
}

/// Wire form of a report. Field order here is the key order in the file.
#[derive(Debug, Serialize, Deserialize)]
struct ReportJson {
    algorithm: Algorithm,
    k: usize,
    converged: bool,
    residual_history: Vec<f64>,
    cost_measured: u64,
    time_measured: u64,
    cost_analytic: u64,
    time_analytic: u64,
    setup_cost: u64,
    errata_notes: Vec<String>,
    final_x: Vec<f64>,
}

impl From<&SolverReport> for ReportJson {
    fn from(r: &SolverReport) -> Self {
        ReportJson {
            algorithm: r.algorithm,
            k: r.k,
            converged: r.converged,
            residual_history: r.residual_history.clone(),
            cost_measured: r.measured.cost_units,
            time_measured: r.measured.time_units,
            cost_analytic: r.analytic.cost,
            time_analytic: r.analytic.time,
            setup_cost: r.measured.setup_cost_units,
            errata_notes: r.errata_notes.clone(),
            final_x: r.final_x.as_slice().to_vec(),
        }
    }
}

impl From<ReportJson> for SolverReport {
    fn from(j: ReportJson) -> Self {
        SolverReport {
            algorithm: j.algorithm,
            k: j.k,
            residual_history: j.residual_history,
            final_x: Vector::from_vec(j.final_x),
            per_node_x: None,
            converged: j.converged,
            measured: MeasuredTotals {
                cost_units: j.cost_measured,
                time_units: j.time_measured,
                setup_cost_units: j.setup_cost,
            },
            analytic: AnalyticTotals { cost: j.cost_analytic, time: j.time_analytic },
            errata_notes: j.errata_notes,
            extras: ReportExtras::default(),
        }
    }
}

pub fn report_to_json(report: &SolverReport) -> String {
    // Finite f64 values serialize as shortest round-trip decimals, so
    // read-back reproduces them bitwise.
    serde_json::to_string_pretty(&ReportJson::from(report)).expect("report serialization cannot fail")
}

pub fn parse_report_str(text: &str) -> Result<SolverReport, ReportError> {
    let wire: ReportJson = serde_json::from_str(text)?;
    // Residuals and estimates are finite by construction; non-finite values
    // would not survive JSON re-serialization anyway.
    if !wire.residual_history.iter().all(|v| v.is_finite()) {
        return Err(ReportError::NonFinite("residual_history"));
    }
    if !wire.final_x.iter().all(|v| v.is_finite()) {
        return Err(ReportError::NonFinite("final_x"));
    }
    Ok(wire.into())
}

pub fn read_report(path: &Path) -> Result<SolverReport, ReportError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ReportError::Io { path: path.display().to_string(), source: e })?;
    parse_report_str(&text)
}

/// One data row per iteration: `iter,residual,cum_cost,cum_time`.
pub fn report_to_csv(report: &SolverReport) -> Result<String, ReportError> {
    if report.extras.iteration_totals.len() != report.k {
        return Err(ReportError::MissingIterationTotals);
    }
    let mut out = String::from("iter,residual,cum_cost,cum_time\n");
    for i in 0..report.k {
        let (cost, time) = report.extras.iteration_totals[i];
        out.push_str(&format!("{},{},{},{}\n", i + 1, report.residual_history[i], cost, time));
    }
    Ok(out)
}

/// Writes the report in the chosen format.
pub fn emit_report(report: &SolverReport, format: ReportFormat, path: &Path) -> Result<(), ReportError> {
    let body = match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Csv => report_to_csv(report)?,
    };
    std::fs::write(path, body).map_err(|e| ReportError::Io { path: path.display().to_string(), source: e })
}
