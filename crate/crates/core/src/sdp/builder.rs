//! Program builders for exact, interval-disturbed and gaussian-noise angle data.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::program::{
    BlockRole, Cone, ConicProgram, Coupling, FixedEntry, ProgramShape, RankTarget, RowKind, Sense,
    SymAccumulator, Term,
};
use crate::network::{AngleData, Annotation, SensorNetwork};
use crate::{Error, Result, Triple};

type Sparse = Vec<(usize, f64)>;

/// Selector `f_i` in the Gram block: `(p_i, 0)` for anchors, `(0, e_{i - n_a})` for unknowns.
fn selector(net: &SensorNetwork, i: usize) -> Sparse {
    if net.is_anchor(i) {
        let p = net.pos(i);
        vec![(0, p.x), (1, p.y)]
    } else {
        vec![(1 + i - net.n_anchors(), 1.0)]
    }
}

fn diff(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out: Sparse = a.clone();
    for &(k, v) in b {
        match out.iter_mut().find(|(j, _)| *j == k) {
            Some(e) => e.1 -= v,
            None => out.push((k, -v)),
        }
    }
    out
}

/// Terms of `<Q_ijk, Y>` where `Q_ijk = ((f_i - f_k)(f_i - f_j)^T + transpose) / 2`.
fn angle_terms(net: &SensorNetwork, y: usize, (i, j, k): Triple) -> Vec<Term> {
    let fi = selector(net, i);
    let u = diff(&fi, &selector(net, j));
    let v = diff(&fi, &selector(net, k));
    let mut acc = SymAccumulator::default();
    acc.add_sym_outer(&v, &u, 1.0);
    acc.into_terms(y).collect()
}

/// Terms of `<Q_ij, Y>` where `Q_ij = (f_i - f_j)(f_i - f_j)^T`.
fn edge_terms(net: &SensorNetwork, y: usize, i: usize, j: usize) -> Vec<Term> {
    let u = diff(&selector(net, i), &selector(net, j));
    let mut acc = SymAccumulator::default();
    acc.add_sym_outer(&u, &u, 1.0);
    acc.into_terms(y).collect()
}

/// Term `scale * D[l1, l2]` (0-based), expressed through the symmetric coefficient `R`.
fn product_term(d: usize, l1: usize, l2: usize, scale: f64) -> Term {
    let (i, j) = (l1.min(l2), l1.max(l2));
    let coef = if i == j { scale } else { 0.5 * scale };
    Term {
        block: d,
        i,
        j,
        coef,
    }
}

fn check_inputs(net: &SensorNetwork, data: &AngleData) -> Result<()> {
    if net.n_anchors() == 0 {
        return Err(Error::EmptyAnchorSet);
    }
    let m = net.grounded().edge_count();
    if data.m() != m {
        return Err(Error::LengthMismatch {
            left: data.m(),
            right: m,
        });
    }
    if data.values.len() != data.triples.len() {
        return Err(Error::LengthMismatch {
            left: data.values.len(),
            right: data.triples.len(),
        });
    }
    Ok(())
}

/// Gram and distance blocks, edge rows and the fixed identity corner.
fn skeleton(net: &SensorNetwork, data: &AngleData) -> ConicProgram {
    let n_s = net.n_unknowns();
    let m = data.m();
    let mut prog = ConicProgram {
        blocks: vec![],
        cones: vec![],
        objective: vec![],
        couplings: vec![],
        fixed: vec![],
        rank_targets: vec![],
        shape: ProgramShape {
            n_anchors: net.n_anchors(),
            n_unknowns: n_s,
            m,
            triples: data.triples.len(),
        },
    };
    prog.add_block("Y", n_s + 2, BlockRole::Gram, Some(Cone::Full));
    let d = prog.add_block("D", m, BlockRole::Distance, Some(Cone::Full));
    prog.rank_targets.push(RankTarget { block: d, rank: 1 });
    for (i, j, v) in [(0, 0, 1.0), (0, 1, 0.0), (1, 1, 1.0)] {
        prog.fixed.push(FixedEntry {
            block: 0,
            i,
            j,
            value: v,
        });
    }
    prog
}

fn push_edge_rows(prog: &mut ConicProgram, net: &SensorNetwork, data: &AngleData) {
    let d = prog.distance_block().expect("distance block");
    for (&(i, j), &l) in &data.edge_index {
        let mut terms = edge_terms(net, 0, i, j);
        terms.push(product_term(d, l - 1, l - 1, -1.0));
        prog.couplings.push(Coupling {
            terms,
            sense: Sense::Eq,
            rhs: 0.0,
            kind: RowKind::Edge(l - 1),
        });
    }
}

fn angle_row(net: &SensorNetwork, data: &AngleData, t: usize, d: usize, a: f64) -> Vec<Term> {
    let (i, j, k) = data.triples[t];
    let mut terms = angle_terms(net, 0, (i, j, k));
    terms.push(product_term(
        d,
        data.edge(i, j) - 1,
        data.edge(i, k) - 1,
        -a,
    ));
    terms
}

/// `<Q_ijk, Y> = a_ijk <R_ijk, D>` for every triple, `<Q_ij, Y> = <R_ij, D>` for every grounded edge,
/// `Y[0..2, 0..2] = I`.
pub fn build_exact_program(net: &SensorNetwork, data: &AngleData) -> Result<ConicProgram> {
    check_inputs(net, data)?;
    if !data.is_exact() {
        return Err(Error::PreconditionViolated(format!(
            "exact program needs exact data, got {}",
            data.regime_name()
        )));
    }
    let mut prog = skeleton(net, data);
    let d = prog.distance_block().expect("distance block");
    for t in 0..data.triples.len() {
        let terms = angle_row(net, data, t, d, data.values[t]);
        prog.couplings.push(Coupling {
            terms,
            sense: Sense::Eq,
            rhs: 0.0,
            kind: RowKind::Angle(t),
        });
    }
    push_edge_rows(&mut prog, net, data);
    Ok(prog)
}

/// How a disturbed program picks one point of its feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbedObjective {
    /// Zero objective: any point satisfying the intervals.
    Feasibility,
    /// Minimize `sum_t |<Q_t, Y> - a_t <R_t, D>|`, the distance of every angle row from
    /// its measured cosine, over the interval-feasible set.
    #[default]
    MeasuredDeviation,
}

/// Angle equalities replaced by `<Q, Y> >= lower <R, D>` and `<Q, Y> <= upper <R, D>`,
/// with the zero objective.
pub fn build_disturbed_program(net: &SensorNetwork, data: &AngleData) -> Result<ConicProgram> {
    build_disturbed_program_with(net, data, DisturbedObjective::Feasibility)
}

/// [`build_disturbed_program`] with a choice of objective. The deviation objective adds a
/// block `E` with nonnegative diagonal and the rows `E_tt -+ (<Q_t, Y> - a_t <R_t, D>) >= 0`.
pub fn build_disturbed_program_with(
    net: &SensorNetwork,
    data: &AngleData,
    objective: DisturbedObjective,
) -> Result<ConicProgram> {
    check_inputs(net, data)?;
    let Annotation::Bounded { lower, upper } = &data.annotation else {
        return Err(Error::PreconditionViolated(format!(
            "disturbed program needs bounded data, got {}",
            data.regime_name()
        )));
    };
    let mut prog = skeleton(net, data);
    let d = prog.distance_block().expect("distance block");
    for t in 0..data.triples.len() {
        prog.couplings.push(Coupling {
            terms: angle_row(net, data, t, d, lower[t]),
            sense: Sense::Ge,
            rhs: 0.0,
            kind: RowKind::AngleLower(t),
        });
        prog.couplings.push(Coupling {
            terms: angle_row(net, data, t, d, upper[t]),
            sense: Sense::Le,
            rhs: 0.0,
            kind: RowKind::AngleUpper(t),
        });
    }
    push_edge_rows(&mut prog, net, data);
    if objective == DisturbedObjective::MeasuredDeviation {
        let n_t = data.triples.len();
        let diag = (0..n_t).map(|t| vec![t]).collect();
        let e = prog.add_block("E", n_t, BlockRole::Deviation, Some(Cone::Cliques(diag)));
        for t in 0..n_t {
            prog.objective.push(Term {
                block: e,
                i: t,
                j: t,
                coef: 1.0,
            });
            let row = angle_row(net, data, t, d, data.values[t]);
            for sign in [1.0, -1.0] {
                let mut terms: Vec<Term> = row
                    .iter()
                    .map(|r| Term {
                        coef: sign * r.coef,
                        ..*r
                    })
                    .collect();
                terms.push(Term {
                    block: e,
                    i: t,
                    j: t,
                    coef: 1.0,
                });
                prog.couplings.push(Coupling {
                    terms,
                    sense: Sense::Ge,
                    rhs: 0.0,
                    kind: RowKind::Deviation(t),
                });
            }
        }
    }
    Ok(prog)
}

/// Index of `a`, `d_ij d_ik` and the constant inside each likelihood block.
pub const LAMBDA_A: usize = 0;
pub const LAMBDA_D: usize = 1;
pub const LAMBDA_ONE: usize = 2;

/// Maximum-likelihood program over `Lambda_j = (a, d_ij d_ik, 1)(a, d_ij d_ik, 1)^T`.
///
/// Objective `sum_j (Lambda_j(0,0) - 2 a_j Lambda_j(0,2) + a_j^2) / sigma_j^2`; rows
/// `<Q_ijk, Y> = Lambda_j(0,1)`, `Lambda_j(1,2) = D[l_ij, l_ik]`, the edge rows, and
/// `Lambda_j(2,2) = 1`. Rank targets: 1 on every `Lambda_j` and on `D`.
pub fn build_noisy_program(net: &SensorNetwork, data: &AngleData) -> Result<ConicProgram> {
    check_inputs(net, data)?;
    let Annotation::Gaussian { sigma } = &data.annotation else {
        return Err(Error::PreconditionViolated(format!(
            "noisy program needs gaussian data, got {}",
            data.regime_name()
        )));
    };
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::PreconditionViolated(format!(
            "sigma must be positive, got {s}"
        )));
    }
    let mut prog = skeleton(net, data);
    let d = prog.distance_block().expect("distance block");
    for (t, &(i, j, k)) in data.triples.iter().enumerate() {
        let lam = prog.add_block(
            format!("Lambda_{}_{}_{}", i, j, k),
            3,
            BlockRole::Likelihood(t),
            Some(Cone::Full),
        );
        prog.rank_targets.push(RankTarget {
            block: lam,
            rank: 1,
        });
        let (a, w) = (data.values[t], 1.0 / (sigma[t] * sigma[t]));
        prog.objective.extend([
            Term {
                block: lam,
                i: LAMBDA_A,
                j: LAMBDA_A,
                coef: w,
            },
            Term {
                block: lam,
                i: LAMBDA_A,
                j: LAMBDA_ONE,
                coef: -a * w,
            },
            Term {
                block: lam,
                i: LAMBDA_ONE,
                j: LAMBDA_ONE,
                coef: a * a * w,
            },
        ]);
        let mut terms = angle_terms(net, 0, (i, j, k));
        terms.push(Term {
            block: lam,
            i: LAMBDA_A,
            j: LAMBDA_D,
            coef: -0.5,
        });
        prog.couplings.push(Coupling {
            terms,
            sense: Sense::Eq,
            rhs: 0.0,
            kind: RowKind::Angle(t),
        });
        prog.couplings.push(Coupling {
            terms: vec![
                Term {
                    block: lam,
                    i: LAMBDA_D,
                    j: LAMBDA_ONE,
                    coef: 0.5,
                },
                product_term(d, data.edge(i, j) - 1, data.edge(i, k) - 1, -1.0),
            ],
            sense: Sense::Eq,
            rhs: 0.0,
            kind: RowKind::Product(t),
        });
        prog.fixed.push(FixedEntry {
            block: lam,
            i: LAMBDA_ONE,
            j: LAMBDA_ONE,
            value: 1.0,
        });
    }
    push_edge_rows(&mut prog, net, data);
    let expected = 2 * data.triples.len() + data.m() + 4;
    let inv = prog.inventory();
    debug_assert_eq!(inv.constraint_count(), expected);
    Ok(prog)
}

/// Block values assembled from the true positions: `Y* = P'P` with `P = [I X]`,
/// `D* = d d'` and, for likelihood blocks, `lambda lambda'` with the true cosines.
pub fn ground_truth_blocks(net: &SensorNetwork, prog: &ConicProgram) -> Result<Vec<DMatrix<f64>>> {
    let n_s = net.n_unknowns();
    let mut p = DMatrix::zeros(2, n_s + 2);
    p[(0, 0)] = 1.0;
    p[(1, 1)] = 1.0;
    for (c, v) in net.unknowns().enumerate() {
        let x = net.pos(v);
        p[(0, c + 2)] = x.x;
        p[(1, c + 2)] = x.y;
    }
    let y = p.transpose() * &p;
    let edges: Vec<(usize, usize)> = net.grounded().edges().collect();
    let dvec = nalgebra::DVector::from_iterator(
        edges.len(),
        edges.iter().map(|&(i, j)| (net.pos(i) - net.pos(j)).norm()),
    );
    let d = &dvec * dvec.transpose();
    let triples = crate::angle_index_set(net.grounded());
    let index = net.edge_index();
    let mut blocks = prog
        .blocks
        .iter()
        .map(|b| match b.role {
            BlockRole::Gram => Ok(y.clone()),
            BlockRole::Distance => Ok(d.clone()),
            BlockRole::Likelihood(t) => {
                let (i, j, k) = triples[t];
                let a = net.framework.angle((i, j, k))?;
                let dd =
                    dvec[index[&(i.min(j), i.max(j))] - 1] * dvec[index[&(i.min(k), i.max(k))] - 1];
                let l = nalgebra::Vector3::new(a, dd, 1.0);
                Ok(DMatrix::from_fn(3, 3, |r, c| l[r] * l[c]))
            }
            BlockRole::Deviation | BlockRole::Auxiliary => Ok(DMatrix::zeros(b.dim, b.dim)),
        })
        .collect::<Result<Vec<_>>>()?;
    // smallest deviation bounds the truth satisfies
    if let Some(e) = prog.block_of(BlockRole::Deviation) {
        for c in prog
            .couplings
            .iter()
            .filter(|c| matches!(c.kind, RowKind::Deviation(_)))
        {
            let RowKind::Deviation(t) = c.kind else {
                unreachable!()
            };
            let need = -c.evaluate(&blocks);
            blocks[e][(t, t)] = blocks[e][(t, t)].max(need);
        }
    }
    Ok(blocks)
}
