//! Aggregate sparsity patterns of constraint matrices and clique selectors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Magnitude above which an aggregate entry counts as structurally nonzero.
pub const SPARSITY_TOL: f64 = 1e-14;

/// Graph on matrix indices `1..=n` with an edge wherever the aggregate is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    pub aggregate: DMatrix<f64>,
    pub graph: Graph,
}

impl SparsityPattern {
    /// Aggregates `|v|` over `(row, col, v)` entries (0-based) of an `n x n` pattern.
    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
        extend_first_rows: bool,
    ) -> Self {
        let mut agg = DMatrix::zeros(n, n);
        for (i, j, v) in entries {
            agg[(i, j)] += v.abs();
            if i != j {
                agg[(j, i)] += v.abs();
            }
        }
        if extend_first_rows {
            for r in 0..n.min(2) {
                for c in 2..n {
                    agg[(r, c)] += 1.0;
                    agg[(c, r)] += 1.0;
                }
            }
        }
        let mut graph = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if agg[(i, j)] > SPARSITY_TOL || agg[(j, i)] > SPARSITY_TOL {
                    graph.add_edge(i + 1, j + 1).expect("indices in range");
                }
            }
        }
        Self {
            aggregate: agg,
            graph,
        }
    }
}

/// Aggregate pattern of equally sized symmetric matrices. With `extend_first_rows`,
/// indices 1 and 2 are joined to every index from 3 on.
pub fn sparsity_pattern(
    matrices: &[DMatrix<f64>],
    extend_first_rows: bool,
) -> Result<SparsityPattern> {
    let n = matrices.first().map_or(0, |m| m.nrows());
    for m in matrices {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows().max(m.ncols()),
            });
        }
    }
    let entries = matrices.iter().flat_map(|m| {
        (0..n).flat_map(move |i| (i..n).map(move |j| (i, j, m[(i, j)].abs().max(m[(j, i)].abs()))))
    });
    Ok(SparsityPattern::from_entries(n, entries, extend_first_rows))
}

/// `|C| x n` 0/1 matrix whose row `r` selects index `clique[r]` (1-based).
pub fn clique_selector(clique: &[usize], n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(clique.len(), n);
    for (r, &c) in clique.iter().enumerate() {
        q[(r, c - 1)] = 1.0;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn single_entry_pattern() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 2)] = 2.0;
        m[(2, 0)] = 2.0;
        let p = sparsity_pattern(&[m], false).unwrap();
        assert_eq!(p.graph.edges().collect::<Vec<_>>(), vec![(1, 3)]);
    }

    #[test]
    fn extension_on_empty_aggregate() {
        let p = sparsity_pattern(&[DMatrix::zeros(4, 4)], true).unwrap();
        assert_eq!(
            p.graph.edges().collect::<Vec<_>>(),
            vec![(1, 3), (1, 4), (2, 3), (2, 4)]
        );
    }

    #[test]
    fn mismatched_dimensions() {
        let r = sparsity_pattern(&[DMatrix::zeros(3, 3), DMatrix::zeros(4, 4)], false);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn selector_examples() {
        assert_eq!(
            clique_selector(&[2], 3),
            DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0])
        );
        let q = clique_selector(&[1, 3], 3);
        let v = DVector::from_vec(vec![10.0, 20.0, 30.0]);
        assert_eq!(&q * v, DVector::from_vec(vec![10.0, 30.0]));
        let x = DMatrix::from_fn(3, 3, |i, j| (3 * i + j) as f64);
        let sub = &q * &x * q.transpose();
        assert_eq!(sub, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 6.0, 8.0]));
    }
}
