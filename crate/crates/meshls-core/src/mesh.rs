//! Connected mesh-network model: topology generation, hop distances and
//! the optional Hamiltonian path used by the incremental solver.
//!
//! The network is idealized: single radio per node, unit bandwidth per link,
//! no loss or contention. Communication accounting lives in [`crate::ledger`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Bound on blind retries when a random geometric graph comes out
/// disconnected.
pub const MAX_TOPOLOGY_ATTEMPTS: u64 = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("network must have at least one node")]
    Empty,
    #[error("edge ({0}, {1}) is out of range for {2} nodes")]
    NodeOutOfRange(usize, usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("failed to generate a connected topology after {attempts} attempts")]
    GenerationFailed { attempts: u64 },
    #[error("nodes {from} and {to} are not adjacent")]
    NotAdjacent { from: usize, to: usize },
    #[error("invalid topology parameter: {0}")]
    InvalidParameter(String),
    #[error("hamiltonian path is invalid: {0}")]
    InvalidHamiltonianPath(String),
}

/// Generator input for [`build_topology`].
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    Ring(usize),
    Path(usize),
    Grid { rows: usize, cols: usize },
    RandomGeometric { n: usize, radius: f64, seed: u64 },
}

impl std::str::FromStr for TopologySpec {
    type Err = String;

    /// Accepts `ring:N`, `path:N`, `grid:RxC`, and `rgg:N:RADIUS[:SEED]`
    /// (alias `random-geometric`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let usage = "expected ring:N | path:N | grid:RxC | rgg:N:RADIUS[:SEED]";
        let parse_count = |tok: &str| tok.parse::<usize>().map_err(|_| format!("invalid count {tok:?}; {usage}"));
        match parts.as_slice() {
            ["ring", n] => Ok(TopologySpec::Ring(parse_count(n)?)),
            ["path", n] => Ok(TopologySpec::Path(parse_count(n)?)),
            ["grid", dims] => {
                let (r, c) = dims
                    .split_once('x')
                    .ok_or_else(|| format!("invalid grid dims {dims:?}; {usage}"))?;
                Ok(TopologySpec::Grid { rows: parse_count(r)?, cols: parse_count(c)? })
            }
            ["rgg" | "random-geometric", n, radius] => Ok(TopologySpec::RandomGeometric {
                n: parse_count(n)?,
                radius: radius.parse().map_err(|_| format!("invalid radius {radius:?}"))?,
                seed: 0,
            }),
            ["rgg" | "random-geometric", n, radius, seed] => Ok(TopologySpec::RandomGeometric {
                n: parse_count(n)?,
                radius: radius.parse().map_err(|_| format!("invalid radius {radius:?}"))?,
                seed: seed.parse().map_err(|_| format!("invalid seed {seed:?}"))?,
            }),
            _ => Err(format!("unknown topology spec {s:?}; {usage}")),
        }
    }
}

/// Connected undirected mesh. Immutable once built; all derived data
/// (degrees, hop distances) is computed at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshNetwork {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    degrees: Vec<usize>,
    sum_deg: usize,
    d_max: usize,
    hop_dist: Vec<u32>,
    hamiltonian_path: Option<Vec<usize>>,
}

impl MeshNetwork {
    /// Builds a network from an explicit edge list and validates all graph
    /// invariants (range, no self-loops or duplicates, connectivity).
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self, MeshError> {
        if n_nodes == 0 {
            return Err(MeshError::Empty);
        }
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n_nodes || b >= n_nodes {
                return Err(MeshError::NodeOutOfRange(a, b, n_nodes));
            }
            if a == b {
                return Err(MeshError::SelfLoop(a));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        for w in normalized.windows(2) {
            if w[0] == w[1] {
                return Err(MeshError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(a, b) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let degrees: Vec<usize> = adjacency.iter().map(Vec::len).collect();
        let sum_deg = degrees.iter().sum();
        let d_max = degrees.iter().copied().max().unwrap_or(0);
        let hop_dist = all_pairs_hops(n_nodes, &adjacency)?;
        Ok(MeshNetwork {
            n_nodes,
            edges: normalized,
            adjacency,
            degrees,
            sum_deg,
            d_max,
            hop_dist,
            hamiltonian_path: None,
        })
    }

    /// Attaches a Hamiltonian path after validating that it visits every
    /// node exactly once along existing edges.
    pub fn with_hamiltonian_path(mut self, path: Vec<usize>) -> Result<Self, MeshError> {
        if path.len() != self.n_nodes {
            return Err(MeshError::InvalidHamiltonianPath(format!(
                "path visits {} of {} nodes",
                path.len(),
                self.n_nodes
            )));
        }
        let mut seen = vec![false; self.n_nodes];
        for &v in &path {
            if v >= self.n_nodes || seen[v] {
                return Err(MeshError::InvalidHamiltonianPath(format!("node {v} repeated or out of range")));
            }
            seen[v] = true;
        }
        for w in path.windows(2) {
            if !self.is_edge(w[0], w[1]) {
                return Err(MeshError::InvalidHamiltonianPath(format!("({}, {}) is not an edge", w[0], w[1])));
            }
        }
        self.hamiltonian_path = Some(path);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.degrees[u]
    }

    /// Sum of all node degrees, i.e. twice the edge count. Kept as an
    /// integer so cost formulas involving `d_avg` stay exact.
    pub fn sum_deg(&self) -> usize {
        self.sum_deg
    }

    pub fn d_avg(&self) -> f64 {
        self.sum_deg as f64 / self.n_nodes as f64
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Shortest hop count between two nodes.
    pub fn hops(&self, a: usize, b: usize) -> usize {
        self.hop_dist[a * self.n_nodes + b] as usize
    }

    pub fn diameter(&self) -> usize {
        self.hop_dist.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn hamiltonian_path(&self) -> Option<&[usize]> {
        self.hamiltonian_path.as_deref()
    }
}

fn all_pairs_hops(n: usize, adjacency: &[Vec<usize>]) -> Result<Vec<u32>, MeshError> {
    let mut dist = vec![u32::MAX; n * n];
    let mut queue = std::collections::VecDeque::new();
    for src in 0..n {
        let row = &mut dist[src * n..(src + 1) * n];
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if row[v] == u32::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if row.contains(&u32::MAX) {
            return Err(MeshError::Disconnected);
        }
    }
    Ok(dist)
}

/// Builds a connected topology from a generator spec.
///
/// Ring, path and grid topologies carry a Hamiltonian path by construction
/// (the grid uses serpentine row order). Random geometric graphs retry
/// `seed, seed+1, ...` deterministically until connected and carry no path.
pub fn build_topology(spec: &TopologySpec) -> Result<MeshNetwork, MeshError> {
    match *spec {
        TopologySpec::Ring(n) => {
            if n == 0 {
                return Err(MeshError::Empty);
            }
            let mut edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            if n > 2 {
                edges.push((0, n - 1));
            }
            let net = MeshNetwork::from_edges(n, &edges)?;
            net.with_hamiltonian_path((0..n).collect())
        }
        TopologySpec::Path(n) => {
            if n == 0 {
                return Err(MeshError::Empty);
            }
            let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            let net = MeshNetwork::from_edges(n, &edges)?;
            net.with_hamiltonian_path((0..n).collect())
        }
        TopologySpec::Grid { rows, cols } => {
            if rows == 0 || cols == 0 {
                return Err(MeshError::InvalidParameter(format!("grid {rows}x{cols}")));
            }
            let id = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            let net = MeshNetwork::from_edges(rows * cols, &edges)?;
            let mut serpentine = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                if r % 2 == 0 {
                    serpentine.extend((0..cols).map(|c| id(r, c)));
                } else {
                    serpentine.extend((0..cols).rev().map(|c| id(r, c)));
                }
            }
            net.with_hamiltonian_path(serpentine)
        }
        TopologySpec::RandomGeometric { n, radius, seed } => {
            if n == 0 {
                return Err(MeshError::Empty);
            }
            if radius.is_nan() || radius <= 0.0 {
                return Err(MeshError::InvalidParameter(format!("radius {radius}")));
            }
            for attempt in 0..MAX_TOPOLOGY_ATTEMPTS {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
                let points: Vec<(f64, f64)> =
                    (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        let dx = points[i].0 - points[j].0;
                        let dy = points[i].1 - points[j].1;
                        if (dx * dx + dy * dy).sqrt() <= radius {
                            edges.push((i, j));
                        }
                    }
                }
                match MeshNetwork::from_edges(n, &edges) {
                    Ok(net) => return Ok(net),
                    Err(MeshError::Disconnected) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(MeshError::GenerationFailed { attempts: MAX_TOPOLOGY_ATTEMPTS })
        }
    }
}

/// Bounded backtracking search for a Hamiltonian path. Used when a topology
/// is loaded from a file and the construction-time path is unknown. Returns
/// `None` when no path exists or the step budget runs out.
pub fn find_hamiltonian_path(net: &MeshNetwork, step_budget: usize) -> Option<Vec<usize>> {
    let n = net.n_nodes();
    if n == 1 {
        return Some(vec![0]);
    }
    let mut budget = step_budget;
    // Prefer low-degree start nodes; endpoints of a path tend to be the
    // sparsest vertices.
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| net.degree(v));
    for start in starts {
        let mut visited = vec![false; n];
        let mut path = Vec::with_capacity(n);
        visited[start] = true;
        path.push(start);
        if extend_path(net, &mut path, &mut visited, &mut budget) {
            return Some(path);
        }
        if budget == 0 {
            return None;
        }
    }
    None
}

fn extend_path(net: &MeshNetwork, path: &mut Vec<usize>, visited: &mut [bool], budget: &mut usize) -> bool {
    if path.len() == net.n_nodes() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let last = *path.last().unwrap();
    // Warnsdorff-style ordering: fewest unvisited continuations first.
    let mut candidates: Vec<usize> = net.neighbors(last).iter().copied().filter(|&v| !visited[v]).collect();
    candidates.sort_by_key(|&v| net.neighbors(v).iter().filter(|&&w| !visited[w]).count());
    for v in candidates {
        visited[v] = true;
        path.push(v);
        if extend_path(net, path, visited, budget) {
            return true;
        }
        path.pop();
        visited[v] = false;
    }
    false
}
