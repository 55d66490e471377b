//! Operator-splitting (ADMM) solver for block conic programs.
//!
//! Each cone is a principal submatrix selection of one block, so the consensus
//! penalty is diagonal in the variable space. The affine step solves
//! `min c'x + 1/2 |x - v|_P^2 s.t. Ax = b` with `P` diagonal through a
//! prefactored `A P^-1 A'`; the cone step projects every clique block onto the
//! PSD cone by a symmetric eigendecomposition.
//!
//! A solve stops when the primal residual `max |x - z|`, the dual residual
//! `rho max |z_k - z_{k-1}|` and, for programs with an objective, the relative duality gap
//! `|c'x + b'lambda| / (1 + |c'x| + |b'lambda|)` (objective scaled to unit largest
//! coefficient) are all below `tol`.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, Matrix3, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use super::program::{BlockRole, Cone, ConicProgram, ProgramShape, Sense};
use crate::graphkit::min_degree_elimination;
use crate::Graph;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 50_000;

const NONE: usize = usize::MAX;
/// Proximal weight on variables that no cone touches.
const PROX_SIGMA: f64 = 1e-6;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
/// Penalty rebalancing stops after this many changes so the iteration can settle.
const MAX_ADAPTATIONS: usize = 10;
/// Rows with no coefficients must have a right-hand side below this to be consistent.
const EMPTY_ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial penalty parameter.
    pub rho: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Iterations between penalty rebalancing checks; 0 disables rebalancing.
    pub adapt_interval: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            rho: 1.0,
            relaxation: 1.6,
            adapt_interval: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Block values returned by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// Symmetric block matrices; entries without a variable are zero.
    pub blocks: Vec<DMatrix<f64>>,
    /// Which entries of each block carry a variable.
    pub coverage: Vec<DMatrix<bool>>,
    pub roles: Vec<BlockRole>,
    pub shape: ProgramShape,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Relative duality gap of the scaled objective; zero for feasibility programs.
    pub duality_gap: f64,
    /// Largest violation of the affine rows at the returned point.
    pub affine_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub objective: f64,
    pub wall_time_ms: f64,
    /// Solver state for warm-starting a closely related program.
    pub warm: WarmStart,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ConeKey {
    Block(usize, Vec<usize>),
    Slack(usize),
}

/// Cone iterates and scaled duals of a finished solve, matched by cone identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WarmStart {
    cones: std::collections::BTreeMap<ConeKey, (Vec<f64>, Vec<f64>)>,
    rho: f64,
}

impl SdpSolution {
    pub fn block_of(&self, role: BlockRole) -> Option<usize> {
        self.roles.iter().position(|r| *r == role)
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("iteration limit reached (primal {:.2e}, dual {:.2e})", .0.primal_residual, .0.dual_residual)]
    MaxIterations(Box<SdpSolution>),
    #[error("rank minimization did not converge after {} outer iterations (last r = {:.2e})", .trace.len(), .trace.last().copied().unwrap_or(f64::NAN))]
    NoConvergence {
        trace: Vec<f64>,
        best: Box<SdpSolution>,
    },
    #[error(transparent)]
    Core(#[from] crate::Error),
}

impl SolveError {
    /// Best iterate carried by non-convergence errors.
    pub fn best_iterate(&self) -> Option<&SdpSolution> {
        match self {
            SolveError::MaxIterations(s) => Some(s),
            SolveError::NoConvergence { best, .. } => Some(best),
            SolveError::Core(_) => None,
        }
    }
}

enum ConeRef {
    /// `k x k` table of variable ids (symmetric).
    Psd {
        k: usize,
        vars: Vec<usize>,
    },
    NonNeg {
        var: usize,
    },
}

impl ConeRef {
    fn cells(&self) -> &[usize] {
        match self {
            ConeRef::Psd { vars, .. } => vars,
            ConeRef::NonNeg { var } => std::slice::from_ref(var),
        }
    }
}

struct SparseRow {
    cols: Vec<(usize, f64)>,
    rhs: f64,
}

struct Layout {
    /// Per block, `dim * dim` table (upper triangle used) of variable ids.
    index: Vec<Vec<usize>>,
    dims: Vec<usize>,
    n_vars: usize,
}

impl Layout {
    fn var(&self, b: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.index[b][i * self.dims[b] + j]
    }
}

fn build_layout(prog: &ConicProgram) -> Layout {
    let dims: Vec<usize> = prog.blocks.iter().map(|b| b.dim).collect();
    let mut mark: Vec<Vec<bool>> = dims.iter().map(|&d| vec![false; d * d]).collect();
    let mut touch = |b: usize, i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        mark[b][i * dims[b] + j] = true;
    };
    for (b, cone) in prog.cones.iter().enumerate() {
        match cone {
            Some(Cone::Full) => {
                for i in 0..dims[b] {
                    for j in i..dims[b] {
                        touch(b, i, j);
                    }
                }
            }
            Some(Cone::Cliques(cl)) => {
                for c in cl {
                    for (a, &i) in c.iter().enumerate() {
                        for &j in &c[a..] {
                            touch(b, i, j);
                        }
                    }
                }
            }
            None => {}
        }
    }
    for t in prog
        .couplings
        .iter()
        .flat_map(|c| c.terms.iter())
        .chain(prog.objective.iter())
    {
        touch(t.block, t.i, t.j);
    }
    for f in &prog.fixed {
        touch(f.block, f.i, f.j);
    }
    let mut n_vars = 0;
    let index = mark
        .iter()
        .map(|m| {
            m.iter()
                .map(|&on| {
                    if on {
                        n_vars += 1;
                        n_vars - 1
                    } else {
                        NONE
                    }
                })
                .collect()
        })
        .collect();
    Layout {
        index,
        dims,
        n_vars,
    }
}

/// Cholesky factor of the permuted normal matrix, kept as sparse rows and columns of `L`.
struct NormalFactor {
    diag: Vec<f64>,
    /// Strictly lower entries `(column, value)` of each row.
    rows: Vec<Vec<(usize, f64)>>,
    /// Strictly lower entries `(row, value)` of each column.
    cols: Vec<Vec<(usize, f64)>>,
}

impl NormalFactor {
    fn solve_in_place(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            let s: f64 = self.rows[i].iter().map(|&(j, l)| l * x[j]).sum();
            x[i] = (x[i] - s) / self.diag[i];
        }
        for i in (0..x.len()).rev() {
            let s: f64 = self.cols[i].iter().map(|&(k, l)| l * x[k]).sum();
            x[i] = (x[i] - s) / self.diag[i];
        }
    }
}

struct Workspace {
    layout: Layout,
    /// Fill-reducing order of the affine rows: `order[p]` is the row factored at position `p`.
    order: Vec<usize>,
    n_total: usize,
    rows: Vec<SparseRow>,
    /// Column lists of `A`: `(row, coefficient)` per variable.
    cols: Vec<Vec<(usize, f64)>>,
    cones: Vec<ConeRef>,
    keys: Vec<ConeKey>,
    /// Cone cells touching each variable.
    weight: Vec<f64>,
    cost: Vec<f64>,
    has_cost: bool,
    opts: SolveOptions,
}

fn psd_project_general(k: usize, v: &[f64], out: &mut [f64]) {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(k, k, v));
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        out.copy_from_slice(v);
        return;
    }
    let mut p = DMatrix::zeros(k, k);
    for (c, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let u = eig.eigenvectors.column(c);
            p += l * u * u.transpose();
        }
    }
    for i in 0..k {
        for j in 0..k {
            out[i * k + j] = p[(i, j)];
        }
    }
}

/// Minimum-degree order of the rows of `A` on the pattern of `A P^-1 A'`.
fn row_order(n_rows: usize, cols: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let mut g = Graph::empty(n_rows);
    for col in cols {
        for (a, &(r, _)) in col.iter().enumerate() {
            for &(s, _) in &col[a + 1..] {
                if r != s {
                    g.add_edge(r + 1, s + 1).expect("row ids in range");
                }
            }
        }
    }
    min_degree_elimination(&g)
        .0
        .into_iter()
        .map(|v| v - 1)
        .collect()
}

/// Writes the PSD projection of the symmetric `k x k` row-major matrix `v` into `out`.
fn psd_project_into(k: usize, v: &[f64], out: &mut [f64]) {
    match k {
        2 => {
            let (a, b, c) = (v[0], 0.5 * (v[1] + v[2]), v[3]);
            let m = 0.5 * (a + c);
            let r = (0.25 * (a - c).powi(2) + b * b).sqrt();
            let (hi, lo) = (m + r, m - r);
            if lo >= 0.0 {
                out.copy_from_slice(&[a, b, b, c]);
            } else if hi <= 0.0 {
                out.fill(0.0);
            } else {
                // hi u u' = hi / (hi - lo) (M - lo I)
                let s = hi / (2.0 * r);
                out.copy_from_slice(&[s * (a - lo), s * b, s * b, s * (c - lo)]);
            }
        }
        3 => {
            let m = Matrix3::from_row_slice(v);
            let eig = m.symmetric_eigen();
            if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
                out.copy_from_slice(v);
                return;
            }
            let mut p = Matrix3::zeros();
            for (c, &l) in eig.eigenvalues.iter().enumerate() {
                if l > 0.0 {
                    let u = eig.eigenvectors.column(c);
                    p += l * u * u.transpose();
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    out[i * 3 + j] = p[(i, j)];
                }
            }
        }
        _ => psd_project_general(k, v, out),
    }
}

impl Workspace {
    fn new(prog: &ConicProgram, opts: SolveOptions) -> Result<Self, SolveError> {
        let layout = build_layout(prog);
        let mut n_total = layout.n_vars;
        let mut rows = Vec::new();
        let mut cones = Vec::new();
        let mut keys = Vec::new();
        let mut infeasible_rows = false;

        for (row, c) in prog.couplings.iter().enumerate() {
            let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
            for t in &c.terms {
                let mult = if t.i == t.j { 1.0 } else { 2.0 };
                *acc.entry(layout.var(t.block, t.i, t.j)).or_insert(0.0) += mult * t.coef;
            }
            let mut cols: Vec<(usize, f64)> = acc.into_iter().filter(|(_, v)| *v != 0.0).collect();
            match c.sense {
                Sense::Eq => {}
                Sense::Le | Sense::Ge => {
                    let s = n_total;
                    n_total += 1;
                    cols.push((s, if c.sense == Sense::Le { 1.0 } else { -1.0 }));
                    cones.push(ConeRef::NonNeg { var: s });
                    keys.push(ConeKey::Slack(row));
                }
            }
            if cols.is_empty() {
                infeasible_rows |= c.rhs.abs() > EMPTY_ROW_TOL;
                continue;
            }
            rows.push(SparseRow { cols, rhs: c.rhs });
        }
        for f in &prog.fixed {
            rows.push(SparseRow {
                cols: vec![(layout.var(f.block, f.i, f.j), 1.0)],
                rhs: f.value,
            });
        }
        if infeasible_rows {
            return Err(crate::Error::PreconditionViolated(
                "program has an empty row with nonzero right-hand side".into(),
            )
            .into());
        }

        for (b, cone) in prog.cones.iter().enumerate() {
            let sets: Vec<Vec<usize>> = match cone {
                Some(Cone::Full) => vec![(0..layout.dims[b]).collect()],
                Some(Cone::Cliques(cl)) => cl.clone(),
                None => continue,
            };
            for set in sets {
                keys.push(ConeKey::Block(b, set.clone()));
                let k = set.len();
                let mut vars = vec![NONE; k * k];
                for p in 0..k {
                    for q in 0..k {
                        vars[p * k + q] = layout.var(b, set[p], set[q]);
                    }
                }
                cones.push(if k == 1 {
                    ConeRef::NonNeg { var: vars[0] }
                } else {
                    ConeRef::Psd { k, vars }
                });
            }
        }

        let mut cols = vec![Vec::new(); n_total];
        for (r, row) in rows.iter().enumerate() {
            for &(v, a) in &row.cols {
                cols[v].push((r, a));
            }
        }
        let order = row_order(rows.len(), &cols);
        let mut weight = vec![0.0; n_total];
        for cone in &cones {
            for &v in cone.cells() {
                weight[v] += 1.0;
            }
        }
        let mut cost = vec![0.0; n_total];
        for t in &prog.objective {
            let mult = if t.i == t.j { 1.0 } else { 2.0 };
            cost[layout.var(t.block, t.i, t.j)] += mult * t.coef;
        }
        let cmax = cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let cost_scale = if cmax > 0.0 { cmax } else { 1.0 };
        cost.iter_mut().for_each(|c| *c /= cost_scale);

        Ok(Self {
            layout,
            order,
            n_total,
            rows,
            cols,
            cones,
            keys,
            weight,
            has_cost: cmax > 0.0,
            cost,
            opts,
        })
    }

    fn factor(&self, rho: f64) -> Result<NormalFactor, SolveError> {
        let nr = self.rows.len();
        let mut at = vec![0; nr];
        for (p, &r) in self.order.iter().enumerate() {
            at[r] = p;
        }
        let mut k = DMatrix::<f64>::zeros(nr, nr);
        for (v, col) in self.cols.iter().enumerate() {
            let pinv = 1.0 / (PROX_SIGMA + rho * self.weight[v]);
            for &(r, a) in col {
                for &(s, b) in col {
                    k[(at[r], at[s])] += a * b * pinv;
                }
            }
        }
        let reg = 1e-13 * (0..nr).map(|i| k[(i, i)]).fold(0.0f64, f64::max);
        for r in 0..nr {
            k[(r, r)] += reg;
        }
        let l = Cholesky::new(k)
            .ok_or_else(|| {
                SolveError::from(crate::Error::NumericalFailure(
                    "normal matrix is not positive definite".into(),
                ))
            })?
            .unpack();
        let mut f = NormalFactor {
            diag: vec![0.0; nr],
            rows: vec![Vec::new(); nr],
            cols: vec![Vec::new(); nr],
        };
        for i in 0..nr {
            f.diag[i] = l[(i, i)];
            for j in 0..i {
                let v = l[(i, j)];
                if v != 0.0 {
                    f.rows[i].push((j, v));
                    f.cols[j].push((i, v));
                }
            }
        }
        Ok(f)
    }

    /// Affine step: `x = P^-1 (q - A' lambda)` with `A x = b`. Returns `b' lambda`, so that
    /// `c'x + b' lambda` is the duality gap once the cone duals settle.
    fn affine_step(
        &self,
        factor: &NormalFactor,
        pdiag: &[f64],
        q: &[f64],
        x: &mut [f64],
        lambda: &mut [f64],
    ) -> f64 {
        for (p, &r) in self.order.iter().enumerate() {
            let row = &self.rows[r];
            let s: f64 = row.cols.iter().map(|&(v, a)| a * q[v] / pdiag[v]).sum();
            lambda[p] = s - row.rhs;
        }
        factor.solve_in_place(lambda);
        let mut by_row = vec![0.0; self.rows.len()];
        for (p, &r) in self.order.iter().enumerate() {
            by_row[r] = lambda[p];
        }
        for v in 0..self.n_total {
            let atl: f64 = self.cols[v].iter().map(|&(r, a)| a * by_row[r]).sum();
            x[v] = (q[v] - atl) / pdiag[v];
        }
        self.rows
            .iter()
            .zip(&by_row)
            .map(|(row, l)| row.rhs * l)
            .sum()
    }

    fn affine_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.cols.iter().map(|&(v, a)| a * x[v]).sum::<f64>() - row.rhs).abs())
            .fold(0.0, f64::max)
    }

    fn run(
        &self,
        prog: &ConicProgram,
        warm: Option<&WarmStart>,
    ) -> Result<SdpSolution, SolveError> {
        let start = Instant::now();
        let n = self.n_total;
        let alpha = self.opts.relaxation;
        let mut rho = warm
            .map_or(self.opts.rho, |w| w.rho)
            .clamp(RHO_MIN, RHO_MAX);
        let mut pdiag: Vec<f64> = self.weight.iter().map(|w| PROX_SIGMA + rho * w).collect();
        let mut chol = self.factor(rho)?;
        let mut lambda = vec![0.0; self.rows.len()];

        let mut x = vec![0.0; n];
        let mut z: Vec<Vec<f64>> = self
            .cones
            .iter()
            .map(|c| vec![0.0; c.cells().len()])
            .collect();
        let mut u: Vec<Vec<f64>> = z.clone();
        if let Some(w) = warm {
            for (c, key) in self.keys.iter().enumerate() {
                if let Some((zw, uw)) = w.cones.get(key) {
                    if zw.len() == z[c].len() {
                        z[c].clone_from(zw);
                        u[c].clone_from(uw);
                        for (cell, &v) in self.cones[c].cells().iter().enumerate() {
                            x[v] = z[c][cell];
                        }
                    }
                }
            }
        }
        let mut q = vec![0.0; n];
        let mut dz = vec![0.0; n];
        let widest = self
            .cones
            .iter()
            .map(|c| c.cells().len())
            .max()
            .unwrap_or(0);
        let (mut relaxed_buf, mut znew_buf, mut shifted_buf) =
            (vec![0.0; widest], vec![0.0; widest], vec![0.0; widest]);

        let mut best: Option<(f64, Vec<f64>, [f64; 3])> = None;
        let mut iterations = 0;
        let mut adaptations = 0;
        let mut converged = false;
        let (mut rp, mut rd, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

        for it in 1..=self.opts.max_iter {
            iterations = it;
            for v in 0..n {
                q[v] = PROX_SIGMA * x[v] - self.cost[v];
            }
            for (c, cone) in self.cones.iter().enumerate() {
                for (cell, &v) in cone.cells().iter().enumerate() {
                    q[v] += rho * (z[c][cell] - u[c][cell]);
                }
            }
            let blam = self.affine_step(&chol, &pdiag, &q, &mut x, &mut lambda);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(crate::Error::NumericalFailure(format!(
                    "non-finite iterate at iteration {it}"
                ))
                .into());
            }

            rp = 0.0;
            let (mut xmax, mut zmax, mut umax) = (0.0f64, 0.0f64, 0.0f64);
            dz.iter_mut().for_each(|d| *d = 0.0);
            for (c, cone) in self.cones.iter().enumerate() {
                let cells = cone.cells();
                let zc = &mut z[c];
                let uc = &mut u[c];
                let relaxed = &mut relaxed_buf[..cells.len()];
                for (cell, &v) in cells.iter().enumerate() {
                    relaxed[cell] = alpha * x[v] + (1.0 - alpha) * zc[cell];
                }
                let znew = &mut znew_buf[..cells.len()];
                match cone {
                    ConeRef::NonNeg { .. } => znew[0] = (relaxed[0] + uc[0]).max(0.0),
                    ConeRef::Psd { k, .. } => {
                        let shifted = &mut shifted_buf[..cells.len()];
                        for cell in 0..cells.len() {
                            shifted[cell] = relaxed[cell] + uc[cell];
                        }
                        psd_project_into(*k, shifted, znew);
                    }
                }
                for (cell, &v) in cells.iter().enumerate() {
                    uc[cell] += relaxed[cell] - znew[cell];
                    dz[v] += znew[cell] - zc[cell];
                    rp = rp.max((x[v] - znew[cell]).abs());
                    xmax = xmax.max(x[v].abs());
                    zmax = zmax.max(znew[cell].abs());
                    umax = umax.max(uc[cell].abs());
                }
                zc.copy_from_slice(znew);
            }
            rd = rho * dz.iter().fold(0.0f64, |m, d| m.max(d.abs()));

            let pobj: f64 = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
            gap = if self.has_cost {
                (pobj + blam).abs() / (1.0 + pobj.abs() + blam.abs())
            } else {
                0.0
            };
            let score = rp.max(rd).max(gap);
            if best.as_ref().is_none_or(|b| score < b.0) {
                best = Some((score, x.clone(), [rp, rd, gap]));
            }
            if score <= self.opts.tol {
                converged = true;
                break;
            }

            // with a zero objective the scaled iteration does not depend on rho
            let adapt =
                self.has_cost && adaptations < MAX_ADAPTATIONS && self.opts.adapt_interval > 0;
            if adapt && it % self.opts.adapt_interval == 0 {
                let rp_rel = rp / xmax.max(zmax).max(1e-12);
                let rd_rel = rd / (rho * umax).max(1e-12);
                let ratio = (rp_rel / rd_rel.max(1e-300)).sqrt();
                if !(0.2..=5.0).contains(&ratio) {
                    let new_rho = (rho * ratio).clamp(RHO_MIN, RHO_MAX);
                    if new_rho != rho {
                        let scale = rho / new_rho;
                        u.iter_mut().flatten().for_each(|v| *v *= scale);
                        rho = new_rho;
                        adaptations += 1;
                        pdiag = self.weight.iter().map(|w| PROX_SIGMA + rho * w).collect();
                        chol = self.factor(rho)?;
                    }
                }
            }
        }

        let (xs, res) = if converged {
            (x, [rp, rd, gap])
        } else {
            let (_, bx, bres) = best.expect("at least one iteration");
            (bx, bres)
        };
        let warm_out = WarmStart {
            cones: self
                .keys
                .iter()
                .cloned()
                .zip(z.into_iter().zip(u))
                .collect(),
            rho,
        };
        let mut sol = self.assemble(prog, &xs, res, iterations, converged, start);
        sol.warm = warm_out;
        if converged {
            Ok(sol)
        } else {
            Err(SolveError::MaxIterations(Box::new(sol)))
        }
    }

    fn assemble(
        &self,
        prog: &ConicProgram,
        x: &[f64],
        [rp, rd, gap]: [f64; 3],
        iterations: usize,
        converged: bool,
        start: Instant,
    ) -> SdpSolution {
        let mut blocks = Vec::with_capacity(prog.blocks.len());
        let mut coverage = Vec::with_capacity(prog.blocks.len());
        for (b, blk) in prog.blocks.iter().enumerate() {
            let d = blk.dim;
            let mut m = DMatrix::zeros(d, d);
            let mut cov = DMatrix::from_element(d, d, false);
            for i in 0..d {
                for j in i..d {
                    let v = self.layout.var(b, i, j);
                    if v != NONE {
                        m[(i, j)] = x[v];
                        m[(j, i)] = x[v];
                        cov[(i, j)] = true;
                        cov[(j, i)] = true;
                    }
                }
            }
            blocks.push(m);
            coverage.push(cov);
        }
        let objective = prog.objective_value(&blocks);
        SdpSolution {
            affine_residual: self.affine_violation(x),
            blocks,
            coverage,
            roles: prog.blocks.iter().map(|b| b.role).collect(),
            shape: prog.shape,
            primal_residual: rp,
            dual_residual: rd,
            duality_gap: gap,
            iterations,
            status: if converged {
                SolveStatus::Optimal
            } else {
                SolveStatus::MaxIter
            },
            objective,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            warm: WarmStart::default(),
        }
    }
}

/// Solves `prog` by ADMM.
///
/// Returns `SolveError::MaxIterations` carrying the iterate with the smallest
/// residual when the tolerance is not reached within `opts.max_iter` iterations.
pub fn solve(prog: &ConicProgram, opts: &SolveOptions) -> Result<SdpSolution, SolveError> {
    let ws = Workspace::new(prog, *opts)?;
    ws.run(prog, None)
}

/// Like [`solve`], starting from the cone iterates of a previous solve. Cones are matched
/// by block and index set (or by coupling row for inequality slacks); unmatched cones start at zero.
pub fn solve_warm(
    prog: &ConicProgram,
    opts: &SolveOptions,
    warm: &WarmStart,
) -> Result<SdpSolution, SolveError> {
    let ws = Workspace::new(prog, *opts)?;
    ws.run(prog, Some(warm))
}
