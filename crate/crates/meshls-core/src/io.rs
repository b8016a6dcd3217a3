//! Text formats for problems and topologies.
//!
//! Problem file: line 1 is `m n`, followed by `m` lines of `n + 1`
//! whitespace-separated decimals (a row of `A`, then the matching entry of
//! `b`). Topology file: line 1 is `N`, followed by one `u v` edge per line
//! with 0-based ids. Reals are written as shortest round-trip decimals, so
//! write/read round-trips are bit-exact.
//!
//! These parsers accept untrusted input: they bound dimensions before
//! allocating, reject non-finite values, and report the offending line.

use std::path::Path;

use thiserror::Error;

use crate::linalg::{Matrix, Vector};
use crate::mesh::{find_hamiltonian_path, MeshError, MeshNetwork};
use crate::problem::LSProblem;

/// Largest accepted problem, as total matrix entries.
pub const MAX_PROBLEM_ENTRIES: usize = 5_000_000;
/// Largest accepted node count in a topology file (the hop matrix is dense).
pub const MAX_TOPOLOGY_NODES: usize = 1024;
/// Backtracking budget when recovering a Hamiltonian path after a file load.
const HAMILTONIAN_SEARCH_BUDGET: usize = 500_000;

#[derive(Debug, Error)]
pub enum FileFormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("input exceeds supported size: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> FileFormatError {
    FileFormatError::Parse { line, msg: msg.into() }
}

fn io_err(path: &Path, source: std::io::Error) -> FileFormatError {
    FileFormatError::Io { path: path.display().to_string(), source }
}

/// Lines with content, 1-indexed; blank lines and `#` comments are skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, FileFormatError> {
    tok.parse::<usize>().map_err(|_| parse_err(line, format!("invalid {what}: {tok:?}")))
}

fn parse_real(tok: &str, line: usize) -> Result<f64, FileFormatError> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("invalid real: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value: {tok:?}")));
    }
    Ok(v)
}

pub fn parse_problem_str(text: &str) -> Result<LSProblem, FileFormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing 'm n' header"))?;
    let mut toks = header.split_whitespace();
    let m = parse_usize(toks.next().ok_or_else(|| parse_err(hline, "missing m"))?, hline, "m")?;
    let n = parse_usize(toks.next().ok_or_else(|| parse_err(hline, "missing n"))?, hline, "n")?;
    if toks.next().is_some() {
        return Err(parse_err(hline, "header must be exactly 'm n'"));
    }
    if m == 0 || n == 0 {
        return Err(parse_err(hline, "m and n must be at least 1"));
    }
    if m.checked_mul(n).is_none_or(|e| e > MAX_PROBLEM_ENTRIES) {
        return Err(FileFormatError::TooLarge(format!("{m}x{n} matrix")));
    }
    let mut data = Vec::with_capacity(m * n);
    let mut rhs = Vec::with_capacity(m);
    let mut rows_read = 0;
    for (lno, line) in lines {
        if rows_read == m {
            return Err(parse_err(lno, format!("expected exactly {m} data rows")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n + 1 {
            return Err(parse_err(lno, format!("expected {} values per row, got {}", n + 1, toks.len())));
        }
        for tok in &toks[..n] {
            data.push(parse_real(tok, lno)?);
        }
        rhs.push(parse_real(toks[n], lno)?);
        rows_read += 1;
    }
    if rows_read != m {
        return Err(parse_err(0, format!("expected {m} data rows, got {rows_read}")));
    }
    let matrix = Matrix::from_vec(m, n, data).expect("sized above");
    Ok(LSProblem::new(matrix, Vector::from_vec(rhs)))
}

pub fn format_problem(problem: &LSProblem) -> String {
    let m = problem.rows();
    let n = problem.cols();
    let mut out = String::new();
    out.push_str(&format!("{m} {n}\n"));
    for i in 0..m {
        let mut first = true;
        for j in 0..n {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{}", problem.matrix[(i, j)]));
            first = false;
        }
        out.push_str(&format!(" {}\n", problem.rhs[i]));
    }
    out
}

pub fn read_problem(path: &Path) -> Result<LSProblem, FileFormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_problem_str(&text)
}

pub fn write_problem(problem: &LSProblem, path: &Path) -> Result<(), FileFormatError> {
    std::fs::write(path, format_problem(problem)).map_err(|e| io_err(path, e))
}

/// Parses a topology file and recomputes derived data. A Hamiltonian path is
/// not part of the format; a bounded search re-attaches one when it exists.
pub fn parse_topology_str(text: &str) -> Result<MeshNetwork, FileFormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing node-count header"))?;
    let mut toks = header.split_whitespace();
    let n = parse_usize(toks.next().ok_or_else(|| parse_err(hline, "missing node count"))?, hline, "node count")?;
    if toks.next().is_some() {
        return Err(parse_err(hline, "header must be exactly the node count"));
    }
    if n == 0 {
        return Err(parse_err(hline, "node count must be at least 1"));
    }
    if n > MAX_TOPOLOGY_NODES {
        return Err(FileFormatError::TooLarge(format!("{n} nodes")));
    }
    let mut edges = Vec::new();
    for (lno, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(lno, format!("expected 'u v', got {line:?}")));
        }
        let u = parse_usize(toks[0], lno, "node id")?;
        let v = parse_usize(toks[1], lno, "node id")?;
        edges.push((u, v));
    }
    let net = MeshNetwork::from_edges(n, &edges)?;
    match find_hamiltonian_path(&net, HAMILTONIAN_SEARCH_BUDGET) {
        Some(path) => Ok(net.with_hamiltonian_path(path)?),
        None => Ok(net),
    }
}

pub fn format_topology(net: &MeshNetwork) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", net.n_nodes()));
    for &(u, v) in net.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_topology(path: &Path) -> Result<MeshNetwork, FileFormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_topology_str(&text)
}

pub fn write_topology(net: &MeshNetwork, path: &Path) -> Result<(), FileFormatError> {
    std::fs::write(path, format_topology(net)).map_err(|e| io_err(path, e))
}
