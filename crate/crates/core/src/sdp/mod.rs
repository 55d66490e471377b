//! Centralized localization through semidefinite relaxations.

mod admm;
mod builder;
mod completion;
mod decompose;
mod extract;
mod pipeline;
mod program;
mod rank;

pub use admm::{
    solve, solve_warm, SdpSolution, SolveError, SolveOptions, SolveStatus, WarmStart,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use builder::{
    build_disturbed_program, build_disturbed_program_with, build_exact_program,
    build_noisy_program, ground_truth_blocks, DisturbedObjective, LAMBDA_A, LAMBDA_D, LAMBDA_ONE,
};
pub use completion::{complete_rank1_psd_3x3, RANK1_TOL};
pub use decompose::{decompose_program, decompose_with_report, DecompositionReport};
pub use extract::{
    extract_positions, extract_positions_with, numeric_rank, DiagnosticOptions, RankDiagnostics,
    Verdict, GRAM_RESIDUAL_TOL, RANK_RATIO_TOL,
};
pub use pipeline::{build_program, localize_sdp, RankMode, SdpOptions, SdpOutcome, SdpStatus};
pub use program::{
    Block, BlockRole, Cone, ConicProgram, Coupling, FixedEntry, ProgramShape, RankTarget,
    RowInventory, RowKind, Sense, Term,
};
pub use rank::{
    iterative_rank_minimization, RankMinimization, RankOptions, RANK_SOLVER_RHO, RANK_SOLVER_TOL,
};
