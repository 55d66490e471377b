//! Combinatorial machinery: bilateration orderings, cliques, chordality and sparsity patterns.

mod cliques;
mod ordering;
mod sparsity;

pub use cliques::{
    chordal_extension, is_chordal, lex_bfs, maximal_cliques, min_degree_elimination,
    perfect_elimination_ordering, CliqueSet,
};
pub use ordering::{
    find_bilateration_ordering, find_nondegenerate_ordering, find_triangulated_ordering,
    is_acute_triangulated, verify_nondegenerate_ordering, BilaterationOrdering, ACUTE_EPS,
    DEGENERACY_TOL,
};
pub use sparsity::{clique_selector, sparsity_pattern, SparsityPattern, SPARSITY_TOL};
