//! Iterative rank minimization by eigenvector penalties.
//!
//! Iteration 0 solves the program without rank rows. Iteration `l` adds a scalar `r >= 0`
//! with objective weight `w_l = alpha^l w0` and, for every rank-targeted block `X` of
//! dimension `n` and target `t`, the semidefinite rows `r I - V' X V >= 0`, where the
//! columns of `V` are eigenvectors of the `n - t` smallest eigenvalues of the previous `X`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::admm::{solve, solve_warm, SdpSolution, SolveError, SolveOptions, SolveStatus};
use super::program::{
    BlockRole, Cone, ConicProgram, Coupling, RankTarget, RowKind, Sense, SymAccumulator, Term,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankOptions {
    pub w0: f64,
    pub alpha: f64,
    pub eps: f64,
    pub max_outer: usize,
    /// Iteration budget of every penalized solve before `r_l < eps` is first observed.
    pub inner_max_iter: usize,
    /// Options of the confirming solve (and of the whole solve when nothing is rank-targeted).
    pub solver: SolveOptions,
}

/// Penalty parameter and tolerance of the penalized solves. A small initial penalty suits
/// the likelihood programs, whose normalized objective dominates the coupling rows.
pub const RANK_SOLVER_RHO: f64 = 0.1;
pub const RANK_SOLVER_TOL: f64 = 1e-7;

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            w0: 1.0,
            alpha: 1.3,
            eps: 1e-6,
            max_outer: 60,
            inner_max_iter: 1000,
            solver: SolveOptions {
                rho: RANK_SOLVER_RHO,
                tol: RANK_SOLVER_TOL,
                ..SolveOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankMinimization {
    pub solution: SdpSolution,
    /// `r_l` for outer iterations `1, 2, ...`; empty when no rank rows were needed.
    pub trace: Vec<f64>,
}

impl RankMinimization {
    pub fn outer_iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Eigenvectors of the `k` smallest eigenvalues of `x`, as columns.
fn smallest_eigenvectors(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(x.clone());
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    DMatrix::from_fn(x.nrows(), k, |r, c| eig.eigenvectors[(r, order[c])])
}

/// Adds the penalty scalar and the rows `W = r I - V' X V`, `W >= 0`, for every target.
fn penalized(
    prog: &ConicProgram,
    targets: &[RankTarget],
    prev: &SdpSolution,
    weight: f64,
) -> (ConicProgram, usize) {
    let mut p = prog.clone();
    let r = p.add_block("r", 1, BlockRole::Auxiliary, Some(Cone::Full));
    p.objective.push(Term {
        block: r,
        i: 0,
        j: 0,
        coef: weight,
    });
    for t in targets {
        let dim = prog.blocks[t.block].dim;
        let k = dim - t.rank;
        let v = smallest_eigenvectors(&prev.blocks[t.block], k);
        let w = p.add_block(
            format!("W_{}", prog.blocks[t.block].name),
            k,
            BlockRole::Auxiliary,
            Some(Cone::Full),
        );
        for a in 0..k {
            for b in a..k {
                let va: Vec<(usize, f64)> = (0..dim).map(|i| (i, v[(i, a)])).collect();
                let vb: Vec<(usize, f64)> = (0..dim).map(|i| (i, v[(i, b)])).collect();
                let mut acc = SymAccumulator::default();
                acc.add_sym_outer(&va, &vb, 1.0);
                let mut terms: Vec<Term> = acc.into_terms(t.block).collect();
                terms.push(Term {
                    block: w,
                    i: a,
                    j: b,
                    coef: if a == b { 1.0 } else { 0.5 },
                });
                if a == b {
                    terms.push(Term {
                        block: r,
                        i: 0,
                        j: 0,
                        coef: -1.0,
                    });
                }
                p.couplings.push(Coupling {
                    terms,
                    sense: Sense::Eq,
                    rhs: 0.0,
                    kind: RowKind::Auxiliary,
                });
            }
        }
    }
    (p, r)
}

/// Runs the outer loop until a converged penalized solve has `r_l < eps`, or `max_outer`
/// penalized solves.
///
/// The returned solution has the blocks of `prog` only. Failure to reach `eps`
/// yields `SolveError::NoConvergence` with the `r_l` trace and the last iterate.
pub fn iterative_rank_minimization(
    prog: &ConicProgram,
    opts: &RankOptions,
) -> Result<RankMinimization, SolveError> {
    let targets: Vec<RankTarget> = prog
        .rank_targets
        .iter()
        .copied()
        .filter(|t| t.rank < prog.blocks[t.block].dim)
        .collect();
    if targets.is_empty() {
        return solve(prog, &opts.solver).map(|solution| RankMinimization {
            solution,
            trace: vec![],
        });
    }
    // Without rank rows the likelihood relaxation need not attain its infimum (the squared
    // product entry of each likelihood block is free), and the early penalized programs
    // behave alike, so these solves only seed `V` and run on a short budget. A small `r_l`
    // from a truncated solve is confirmed by a solve with the full budget.
    let budget = SolveOptions {
        max_iter: opts.inner_max_iter.min(opts.solver.max_iter),
        ..opts.solver
    };
    let accept_truncated = |res: Result<SdpSolution, SolveError>| match res {
        Ok(s) => Ok(s),
        Err(SolveError::MaxIterations(s)) => Ok(*s),
        Err(e) => Err(e),
    };
    let mut sol = accept_truncated(solve(prog, &budget))?;
    let nb = prog.blocks.len();
    let mut trace = Vec::new();
    let mut weight = opts.w0;
    for _ in 1..=opts.max_outer {
        weight *= opts.alpha;
        let (p, r) = penalized(prog, &targets, &sol, weight);
        let mut next = accept_truncated(solve_warm(&p, &budget, &sol.warm))?;
        if next.blocks[r][(0, 0)] < opts.eps && next.status != SolveStatus::Optimal {
            next = accept_truncated(solve_warm(&p, &opts.solver, &next.warm))?;
        }
        let r_l = next.blocks[r][(0, 0)];
        trace.push(r_l);
        let done = r_l < opts.eps && next.status == SolveStatus::Optimal;
        next.blocks.truncate(nb);
        next.coverage.truncate(nb);
        next.roles.truncate(nb);
        next.objective = prog.objective_value(&next.blocks);
        sol = next;
        if done {
            return Ok(RankMinimization {
                solution: sol,
                trace,
            });
        }
    }
    Err(SolveError::NoConvergence {
        trace,
        best: Box::new(sol),
    })
}
