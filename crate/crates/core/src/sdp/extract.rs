//! Position read-out and rank diagnostics.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::admm::SdpSolution;
use super::program::BlockRole;
use crate::network::SensorNetwork;
use crate::Point2;

/// Eigenvalues below this fraction of the largest magnitude count as zero.
pub const RANK_RATIO_TOL: f64 = 1e-6;
/// Largest accepted `|Y22 - Y12' Y12|` for a certified solution.
pub const GRAM_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Gram block of rank 2, distance block of rank 1, consistent Gram entries.
    ExactRank3,
    RelaxationGap,
    /// The (completed) distance block has a significantly negative eigenvalue.
    #[serde(rename = "indefinite_D")]
    IndefiniteD,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::ExactRank3 => "exact_rank3",
            Verdict::RelaxationGap => "relaxation_gap",
            Verdict::IndefiniteD => "indefinite_D",
        }
    }

    pub fn is_trusted(&self) -> bool {
        *self == Verdict::ExactRank3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticOptions {
    pub rank_tol: f64,
    pub gram_tol: f64,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            rank_tol: RANK_RATIO_TOL,
            gram_tol: GRAM_RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankDiagnostics {
    /// Descending spectrum of the Gram block (completed where decomposed).
    pub eigen_y: Vec<f64>,
    /// Descending spectrum of the distance block (completed where decomposed).
    pub eigen_d: Vec<f64>,
    pub rank_y: usize,
    pub rank_d: usize,
    pub rank_z: usize,
    pub gram_residual: f64,
    pub verdict: Verdict,
    pub rank_tol: f64,
}

/// Count of eigenvalues whose magnitude exceeds `tol` times the largest magnitude.
pub fn numeric_rank(eigs: &[f64], tol: f64) -> usize {
    let max = eigs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if max == 0.0 {
        return 0;
    }
    eigs.iter().filter(|l| l.abs() > tol * max).count()
}

fn descending_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return vec![];
    }
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// Positions `X = Y[0..2, 2..]` and rank diagnostics with default thresholds.
pub fn extract_positions(sol: &SdpSolution, net: &SensorNetwork) -> (Vec<Point2>, RankDiagnostics) {
    extract_positions_with(sol, net, DiagnosticOptions::default())
}

/// Positions and diagnostics. Entries of the Gram block without a variable are filled with
/// `x_p' x_q`; entries of the distance block without a variable with `sqrt(D_pp D_qq)`.
pub fn extract_positions_with(
    sol: &SdpSolution,
    net: &SensorNetwork,
    opts: DiagnosticOptions,
) -> (Vec<Point2>, RankDiagnostics) {
    let yb = sol
        .block_of(BlockRole::Gram)
        .expect("solution has a Gram block");
    let y = &sol.blocks[yb];
    let cov = &sol.coverage[yb];
    let n_s = y.nrows() - 2;
    debug_assert_eq!(n_s, net.n_unknowns());
    let xs: Vec<Point2> = (0..n_s)
        .map(|c| Point2::new(y[(0, c + 2)], y[(1, c + 2)]))
        .collect();

    let mut yc = y.clone();
    let mut gram2 = 0.0;
    for p in 0..n_s {
        for q in 0..n_s {
            let g = xs[p].dot(xs[q]);
            if cov[(p + 2, q + 2)] {
                gram2 += (y[(p + 2, q + 2)] - g).powi(2);
            } else {
                yc[(p + 2, q + 2)] = g;
            }
        }
    }
    let eigen_y = descending_eigenvalues(&yc);
    let rank_y = numeric_rank(&eigen_y, opts.rank_tol);

    let (eigen_d, rank_d) = match sol.block_of(BlockRole::Distance) {
        Some(db) => {
            let d = &sol.blocks[db];
            let dcov = &sol.coverage[db];
            let mut dc = d.clone();
            for p in 0..d.nrows() {
                for q in 0..d.nrows() {
                    if !dcov[(p, q)] {
                        dc[(p, q)] = (d[(p, p)].max(0.0) * d[(q, q)].max(0.0)).sqrt();
                    }
                }
            }
            let e = descending_eigenvalues(&dc);
            let r = numeric_rank(&e, opts.rank_tol);
            (e, r)
        }
        None => (vec![], 0),
    };

    let gram_residual = gram2.sqrt();
    let d_max = eigen_d.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let d_min = eigen_d.last().copied().unwrap_or(0.0);
    let verdict = if rank_y == 2 && rank_d == 1 && gram_residual <= opts.gram_tol {
        Verdict::ExactRank3
    } else if d_min < -opts.rank_tol * d_max {
        Verdict::IndefiniteD
    } else {
        Verdict::RelaxationGap
    };

    let diag = RankDiagnostics {
        eigen_y,
        eigen_d,
        rank_y,
        rank_d,
        rank_z: rank_y + rank_d,
        gram_residual,
        verdict,
        rank_tol: opts.rank_tol,
    };
    (xs, diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_rank_is_relative() {
        assert_eq!(numeric_rank(&[10.0, 1e-4, 1e-6], 1e-6), 2);
        assert_eq!(numeric_rank(&[0.0, 0.0], 1e-6), 0);
        assert_eq!(numeric_rank(&[1.0, -0.5], 1e-6), 2);
    }
}
