//! Chordal decomposition of the Gram and distance cones.

use super::program::{Cone, ConicProgram};
use crate::graphkit::{
    chordal_extension, find_bilateration_ordering, is_acute_triangulated, maximal_cliques,
    SparsityPattern,
};
use crate::network::SensorNetwork;
use crate::{Error, Graph, Result};

/// Which parts of a program were split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub gram_cliques: usize,
    pub gram_max_clique: usize,
    /// Edges added to make the Gram pattern chordal.
    pub fill_edges: usize,
    /// `None` when the distance block kept its full cone.
    pub distance_cones: Option<usize>,
}

fn block_pattern(prog: &ConicProgram, block: usize, extend: bool) -> SparsityPattern {
    let dim = prog.blocks[block].dim;
    let terms = prog
        .couplings
        .iter()
        .flat_map(|c| c.terms.iter())
        .filter(|t| t.block == block);
    let entries = terms.map(|t| (t.i, t.j, t.coef)).chain(
        prog.fixed
            .iter()
            .filter(|f| f.block == block)
            .map(|f| (f.i, f.j, 1.0)),
    );
    SparsityPattern::from_entries(dim, entries, extend)
}

fn to_zero_based(cliques: impl IntoIterator<Item = Vec<usize>>) -> Vec<Vec<usize>> {
    cliques
        .into_iter()
        .map(|c| c.into_iter().map(|v| v - 1).collect())
        .collect()
}

/// Principal submatrices over the maximal cliques of the distance pattern. Every triangle of
/// the pattern lies in one of them, so the cones imply all 3x3 principal constraints while
/// needing far fewer projections than one cone per triangle.
fn distance_cones(pattern: &Graph) -> Vec<Vec<usize>> {
    to_zero_based(maximal_cliques(pattern).cliques)
}

/// Replaces the Gram cone by cones over the maximal cliques of its aggregate pattern
/// (rows 1 and 2 joined to every column), and, when the grounded framework is
/// acute-triangulated, the distance cone and its rank target by small principal cones.
///
/// A Gram pattern that is not chordal is first extended by minimum-degree fill-in.
/// Fails with `NotDecomposable` when the grounded graph has no bilateration ordering.
pub fn decompose_program(prog: &ConicProgram, net: &SensorNetwork) -> Result<ConicProgram> {
    decompose_with_report(prog, net).map(|(p, _)| p)
}

pub fn decompose_with_report(
    prog: &ConicProgram,
    net: &SensorNetwork,
) -> Result<(ConicProgram, DecompositionReport)> {
    let mut out = prog.clone();
    let y = prog.gram_block();
    if find_bilateration_ordering(net.grounded(), None).is_none() {
        return Err(Error::NotDecomposable(
            "grounded graph has no bilateration ordering".into(),
        ));
    }
    let pattern = block_pattern(prog, y, true);
    let chordal = chordal_extension(&pattern.graph);
    let fill_edges = chordal.edge_count() - pattern.graph.edge_count();
    let cliques = maximal_cliques(&chordal);
    let gram_max_clique = cliques.max_size();
    let gram_cliques = cliques.len();
    out.cones[y] = Some(Cone::Cliques(to_zero_based(cliques.cliques)));

    let mut distance = None;
    if let Some(d) = prog.distance_block() {
        if is_acute_triangulated(&net.grounded_framework()) {
            let cones = distance_cones(&block_pattern(prog, d, false).graph);
            distance = Some(cones.len());
            out.cones[d] = Some(Cone::Cliques(cones));
            out.rank_targets.retain(|t| t.block != d);
        }
    }
    Ok((
        out,
        DecompositionReport {
            gram_cliques,
            gram_max_clique,
            fill_edges,
            distance_cones: distance,
        },
    ))
}
