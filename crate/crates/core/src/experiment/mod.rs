//! Network generation, evaluation and batch experiments.

mod generate;
mod run;

pub use generate::{
    generate_network, NetworkKind, MAX_ACUTE_ANGLE_DEG, MAX_PLACEMENT_ATTEMPTS, MIN_ANGLE_DEG,
    MIN_SEPARATION,
};
pub use run::{
    evaluate, repetition_seeds, run_experiment, write_csv, ExperimentSpec, Generator, Method,
    ResultRow, SolverChoice, CSV_HEADER,
};
