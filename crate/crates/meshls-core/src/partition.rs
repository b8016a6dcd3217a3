//! Row and column partitioning of the global system across nodes, plus the
//! one-time column redistribution (charged as setup traffic).
//!
//! Blocks are consecutive and ordered by node id; when the dimension does
//! not divide evenly, lower-numbered nodes take one extra row or column.

use thiserror::Error;

use crate::ledger::CostLedger;
use crate::linalg::{Matrix, Vector};
use crate::mesh::MeshNetwork;
use crate::problem::LSProblem;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("cannot split {total} {what} across {parts} nodes")]
    TooFew { what: &'static str, total: usize, parts: usize },
    #[error("partition has {blocks} blocks but the network has {nodes} nodes")]
    NodeCountMismatch { blocks: usize, nodes: usize },
}

/// Sizes of `parts` consecutive blocks covering `total` items, extras first.
pub fn block_sizes(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowBlock {
    pub matrix: Matrix,
    pub rhs: Vector,
    pub row_offset: usize,
}

/// Per-node horizontal slices of `(A, b)`; stacking them in node order
/// reassembles the global system.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPartition {
    pub blocks: Vec<RowBlock>,
    pub n_cols: usize,
}

impl RowPartition {
    pub fn n_nodes(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.matrix.rows()).sum()
    }

    /// Reassembles the global `(A, b)` by stacking blocks in node order.
    pub fn assemble(&self) -> (Matrix, Vector) {
        let m = self.total_rows();
        let mut a = Matrix::zeros(m, self.n_cols);
        let mut b = Vector::zeros(m);
        for block in &self.blocks {
            for i in 0..block.matrix.rows() {
                let gi = block.row_offset + i;
                for j in 0..self.n_cols {
                    a[(gi, j)] = block.matrix[(i, j)];
                }
                b[gi] = block.rhs[i];
            }
        }
        (a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColBlock {
    pub matrix: Matrix,
    pub col_offset: usize,
}

/// Per-node vertical slices of `A`; concatenating them in node order
/// reassembles the global matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ColPartition {
    pub blocks: Vec<ColBlock>,
    pub n_rows: usize,
}

impl ColPartition {
    pub fn n_nodes(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_cols(&self) -> usize {
        self.blocks.iter().map(|b| b.matrix.cols()).sum()
    }

    pub fn assemble(&self) -> Matrix {
        let n = self.total_cols();
        let mut a = Matrix::zeros(self.n_rows, n);
        for block in &self.blocks {
            for i in 0..self.n_rows {
                for j in 0..block.matrix.cols() {
                    a[(i, block.col_offset + j)] = block.matrix[(i, j)];
                }
            }
        }
        a
    }
}

/// Splits `(A, b)` into consecutive row blocks, one per node.
pub fn row_partition(problem: &LSProblem, n_nodes: usize) -> Result<RowPartition, PartitionError> {
    let m = problem.rows();
    if n_nodes == 0 || m < n_nodes {
        return Err(PartitionError::TooFew { what: "rows", total: m, parts: n_nodes.max(1) });
    }
    let sizes = block_sizes(m, n_nodes);
    let mut blocks = Vec::with_capacity(n_nodes);
    let mut offset = 0;
    for &h in &sizes {
        blocks.push(RowBlock {
            matrix: problem.matrix.row_block(offset, h),
            rhs: problem.rhs.slice(offset, h),
            row_offset: offset,
        });
        offset += h;
    }
    Ok(RowPartition { blocks, n_cols: problem.cols() })
}

/// Splits `A` into consecutive column blocks, one per node.
pub fn col_partition(problem: &LSProblem, n_nodes: usize) -> Result<ColPartition, PartitionError> {
    let n = problem.cols();
    if n_nodes == 0 || n < n_nodes {
        return Err(PartitionError::TooFew { what: "cols", total: n, parts: n_nodes.max(1) });
    }
    let sizes = block_sizes(n, n_nodes);
    let mut blocks = Vec::with_capacity(n_nodes);
    let mut offset = 0;
    for &w in &sizes {
        blocks.push(ColBlock { matrix: problem.matrix.col_block(offset, w), col_offset: offset });
        offset += w;
    }
    Ok(ColPartition { blocks, n_rows: problem.rows() })
}

/// One-time exchange that turns per-node row blocks into per-node column
/// blocks. Each node floods the part of its rows that belongs to other
/// nodes' column blocks (`m_u * (n - n_u)` scalars, flood convention
/// `payload * N`); the traffic is charged to the setup counter only.
pub fn redistribute_columns(
    rows: &RowPartition,
    net: &MeshNetwork,
    ledger: &mut CostLedger,
) -> Result<ColPartition, PartitionError> {
    let n_nodes = rows.n_nodes();
    if n_nodes != net.n_nodes() {
        return Err(PartitionError::NodeCountMismatch { blocks: n_nodes, nodes: net.n_nodes() });
    }
    let n = rows.n_cols;
    if n < n_nodes {
        return Err(PartitionError::TooFew { what: "cols", total: n, parts: n_nodes });
    }
    let col_sizes = block_sizes(n, n_nodes);
    for (u, block) in rows.blocks.iter().enumerate() {
        let foreign_cols = n - col_sizes[u];
        ledger.record_setup_flood(net, u, block.matrix.rows() * foreign_cols, "setup.column_exchange");
    }
    let (a, b) = rows.assemble();
    let problem = LSProblem::new(a, b);
    col_partition(&problem, n_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, TopologySpec};
    use crate::problem::{generate_problem, ProblemKind};

    #[test]
    fn block_sizes_even_and_remainder() {
        assert_eq!(block_sizes(6, 3), vec![2, 2, 2]);
        assert_eq!(block_sizes(7, 3), vec![3, 2, 2]);
        assert_eq!(block_sizes(5, 2), vec![3, 2]);
        assert_eq!(block_sizes(4, 2), vec![2, 2]);
    }

    #[test]
    fn row_partition_reassembles() {
        let p = generate_problem(10, 4, 1, ProblemKind::Gaussian).unwrap();
        let rp = row_partition(&p, 3).unwrap();
        assert_eq!(rp.blocks.iter().map(|b| b.matrix.rows()).collect::<Vec<_>>(), vec![4, 3, 3]);
        let (a, b) = rp.assemble();
        assert_eq!(a, p.matrix);
        assert_eq!(b, p.rhs);
    }

    #[test]
    fn col_partition_reassembles() {
        let p = generate_problem(8, 6, 2, ProblemKind::Gaussian).unwrap();
        let cp = col_partition(&p, 2).unwrap();
        assert_eq!(cp.blocks.iter().map(|b| b.matrix.cols()).collect::<Vec<_>>(), vec![3, 3]);
        assert_eq!(cp.assemble(), p.matrix);

        let cp5 = col_partition(&generate_problem(8, 5, 2, ProblemKind::Gaussian).unwrap(), 2).unwrap();
        assert_eq!(cp5.blocks.iter().map(|b| b.matrix.cols()).collect::<Vec<_>>(), vec![3, 2]);
    }

    #[test]
    fn partition_errors() {
        let p = generate_problem(4, 3, 0, ProblemKind::Gaussian).unwrap();
        assert!(matches!(row_partition(&p, 5), Err(PartitionError::TooFew { .. })));
        assert!(matches!(col_partition(&p, 4), Err(PartitionError::TooFew { .. })));
    }

    #[test]
    fn redistribute_setup_cost() {
        let p = generate_problem(6, 6, 3, ProblemKind::Gaussian).unwrap();
        let net = build_topology(&TopologySpec::Ring(3)).unwrap();
        let rp = row_partition(&p, 3).unwrap();
        let mut ledger = CostLedger::new();
        let cp = redistribute_columns(&rp, &net, &mut ledger).unwrap();
        // Each node floods 2 * 4 = 8 scalars at flood cost 8 * 3 = 24.
        assert_eq!(ledger.setup_cost_units(), 72);
        assert_eq!(ledger.cost_units(), 0);
        assert_eq!(ledger.time_units(), 0);
        assert_eq!(cp.assemble(), p.matrix);
    }

    #[test]
    fn redistribute_single_node_is_free() {
        let p = generate_problem(4, 2, 3, ProblemKind::Gaussian).unwrap();
        let net = build_topology(&TopologySpec::Ring(1)).unwrap();
        let rp = row_partition(&p, 1).unwrap();
        let mut ledger = CostLedger::new();
        redistribute_columns(&rp, &net, &mut ledger).unwrap();
        assert_eq!(ledger.setup_cost_units(), 0);
    }

    #[test]
    fn symmetric_square_col_blocks_are_row_block_transposes() {
        // Build a symmetric matrix; with matching partitions the column
        // block on each node is the transpose of its row block.
        let g = generate_problem(6, 6, 5, ProblemKind::Gaussian).unwrap();
        let sym = {
            let mut s = g.matrix.clone();
            for i in 0..6 {
                for j in 0..6 {
                    s[(i, j)] = 0.5 * (g.matrix[(i, j)] + g.matrix[(j, i)]);
                }
            }
            s
        };
        let p = LSProblem::new(sym, g.rhs.clone());
        let rp = row_partition(&p, 3).unwrap();
        let cp = col_partition(&p, 3).unwrap();
        for u in 0..3 {
            assert_eq!(cp.blocks[u].matrix, rp.blocks[u].matrix.transpose());
        }
    }
}
