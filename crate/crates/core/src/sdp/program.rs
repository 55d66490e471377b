//! Block-structured conic programs over symmetric matrix variables.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

/// What a matrix block stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRole {
    /// `[[I, X], [X^T, X^T X]]`, dimension `n_s + 2`.
    Gram,
    /// `d d^T` over the grounded edges, dimension `m`.
    Distance,
    /// `(a, d_ij d_ik, 1)(...)^T` for one angle triple.
    Likelihood(usize),
    /// Diagonal bounds on the deviation of each angle row from its measured cosine.
    Deviation,
    /// Helper blocks added by solvers (penalty scalars, slack matrices).
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub name: String,
    pub dim: usize,
    pub role: BlockRole,
}

/// Entry `(i, j)`, `i <= j`, of the symmetric coefficient matrix `K` applied to block `block`.
///
/// Its contribution to `<K, X>` is `coef * X_ii` on the diagonal and `2 * coef * X_ij` off it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// Provenance of a coupling row, used for inventories and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum RowKind {
    /// Angle relation of triple `t`.
    Angle(usize),
    AngleLower(usize),
    AngleUpper(usize),
    /// Product entry of a likelihood block tied to the distance block.
    Product(usize),
    /// Squared length of grounded edge `l` (0-based).
    Edge(usize),
    /// One side of `e_t >= |<Q, Y> - a <R, D>|` for triple `t`.
    Deviation(usize),
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    pub terms: Vec<Term>,
    pub sense: Sense,
    pub rhs: f64,
    pub kind: RowKind,
}

impl Coupling {
    /// Evaluates `sum <K, X>` at `blocks`.
    pub fn evaluate(&self, blocks: &[DMatrix<f64>]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mult = if t.i == t.j { 1.0 } else { 2.0 };
                mult * t.coef * blocks[t.block][(t.i, t.j)]
            })
            .sum()
    }

    /// Signed violation: `|lhs - rhs|` for equalities, one-sided excess for inequalities.
    pub fn violation(&self, blocks: &[DMatrix<f64>]) -> f64 {
        let lhs = self.evaluate(blocks);
        match self.sense {
            Sense::Eq => (lhs - self.rhs).abs(),
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedEntry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Positive semidefinite constraint attached to a block.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cone {
    /// The whole block is PSD.
    Full,
    /// Every listed principal submatrix (0-based index sets) is PSD.
    Cliques(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankTarget {
    pub block: usize,
    pub rank: usize,
}

/// Problem dimensions carried along for extraction and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProgramShape {
    pub n_anchors: usize,
    pub n_unknowns: usize,
    /// Number of grounded edges.
    pub m: usize,
    /// Number of angle triples.
    pub triples: usize,
}

/// `min sum <C_b, X_b>` subject to linear couplings, fixed entries and PSD cones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConicProgram {
    pub blocks: Vec<Block>,
    /// One cone per block; `None` leaves the block free.
    pub cones: Vec<Option<Cone>>,
    pub objective: Vec<Term>,
    pub couplings: Vec<Coupling>,
    pub fixed: Vec<FixedEntry>,
    pub rank_targets: Vec<RankTarget>,
    pub shape: ProgramShape,
}

/// Row inventory of a program, by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RowInventory {
    pub angle: usize,
    pub angle_bounds: usize,
    pub product: usize,
    pub edge: usize,
    pub auxiliary: usize,
    /// Fixed-entry relations counted over the full matrix (`Y_12` and `Y_21` separately).
    pub fixed_relations: usize,
    /// Fixed entries of likelihood blocks (`Lambda_j(3,3) = 1`).
    pub likelihood_normalizations: usize,
}

impl RowInventory {
    /// Couplings plus fixed relations on the Gram block.
    pub fn constraint_count(&self) -> usize {
        self.angle
            + self.angle_bounds
            + self.product
            + self.edge
            + self.auxiliary
            + self.fixed_relations
    }
}

impl ConicProgram {
    pub fn block_of(&self, role: BlockRole) -> Option<usize> {
        self.blocks.iter().position(|b| b.role == role)
    }

    pub fn gram_block(&self) -> usize {
        self.block_of(BlockRole::Gram)
            .expect("program has a Gram block")
    }

    pub fn distance_block(&self) -> Option<usize> {
        self.block_of(BlockRole::Distance)
    }

    pub fn add_block(
        &mut self,
        name: impl Into<String>,
        dim: usize,
        role: BlockRole,
        cone: Option<Cone>,
    ) -> usize {
        self.blocks.push(Block {
            name: name.into(),
            dim,
            role,
        });
        self.cones.push(cone);
        self.blocks.len() - 1
    }

    pub fn inventory(&self) -> RowInventory {
        let mut inv = RowInventory::default();
        for c in &self.couplings {
            match c.kind {
                RowKind::Angle(_) => inv.angle += 1,
                RowKind::AngleLower(_) | RowKind::AngleUpper(_) => inv.angle_bounds += 1,
                RowKind::Product(_) => inv.product += 1,
                RowKind::Edge(_) => inv.edge += 1,
                RowKind::Deviation(_) | RowKind::Auxiliary => inv.auxiliary += 1,
            }
        }
        for f in &self.fixed {
            match self.blocks[f.block].role {
                BlockRole::Likelihood(_) => inv.likelihood_normalizations += 1,
                _ => inv.fixed_relations += if f.i == f.j { 1 } else { 2 },
            }
        }
        inv
    }

    /// Dense symmetric coefficient matrix of coupling `row` on `block`.
    pub fn coefficient_matrix(&self, row: usize, block: usize) -> DMatrix<f64> {
        let d = self.blocks[block].dim;
        let mut k = DMatrix::zeros(d, d);
        for t in self.couplings[row]
            .terms
            .iter()
            .filter(|t| t.block == block)
        {
            k[(t.i, t.j)] += t.coef;
            if t.i != t.j {
                k[(t.j, t.i)] += t.coef;
            }
        }
        k
    }

    /// Largest violation over couplings and fixed entries at `blocks`.
    pub fn max_violation(&self, blocks: &[DMatrix<f64>]) -> f64 {
        let rows = self.couplings.iter().map(|c| c.violation(blocks));
        let fixed = self
            .fixed
            .iter()
            .map(|f| (blocks[f.block][(f.i, f.j)] - f.value).abs());
        rows.chain(fixed).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, blocks: &[DMatrix<f64>]) -> f64 {
        self.objective
            .iter()
            .map(|t| {
                let mult = if t.i == t.j { 1.0 } else { 2.0 };
                mult * t.coef * blocks[t.block][(t.i, t.j)]
            })
            .sum()
    }

    /// Materializes the single-variable view `Z = diag(Y, D)` of a two-block solution.
    pub fn stacked_view(&self, blocks: &[DMatrix<f64>]) -> Option<DMatrix<f64>> {
        let y = &blocks[self.gram_block()];
        let d = &blocks[self.distance_block()?];
        let (a, b) = (y.nrows(), d.nrows());
        let mut z = DMatrix::zeros(a + b, a + b);
        z.view_mut((0, 0), (a, a)).copy_from(y);
        z.view_mut((a, a), (b, b)).copy_from(d);
        Some(z)
    }
}

/// Accumulates entries of a symmetric matrix, keeping the upper triangle.
#[derive(Debug, Default, Clone)]
pub(crate) struct SymAccumulator {
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymAccumulator {
    /// Adds `v` at full-matrix position `(p, q)`; only `p <= q` positions are kept,
    /// so callers enumerate the full symmetric matrix.
    pub fn add_full(&mut self, p: usize, q: usize, v: f64) {
        if p <= q {
            *self.entries.entry((p, q)).or_insert(0.0) += v;
        }
    }

    /// Adds the symmetrized outer product `s * (u v^T + v u^T) / 2` for sparse `u`, `v`.
    pub fn add_sym_outer(&mut self, u: &[(usize, f64)], v: &[(usize, f64)], s: f64) {
        for &(p, up) in u {
            for &(q, vq) in v {
                self.add_full(p, q, 0.5 * s * up * vq);
                self.add_full(q, p, 0.5 * s * up * vq);
            }
        }
    }

    pub fn into_terms(self, block: usize) -> impl Iterator<Item = Term> {
        self.entries
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(move |((i, j), coef)| Term { block, i, j, coef })
    }
}
