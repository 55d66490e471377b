//! Distributed bilateration localization: local solvers and a round-based simulator.

mod linear;
mod protocol;

pub use linear::{fg_solve, fg_solve_with, fx_solve, fx_solve_with, BLP_COLLINEAR_TOL};
pub use protocol::{
    check_blp_preconditions, run_blp, simulate, BlpError, BlpPreconditions, BlpRun, BlpWorld,
    Message, MessageKind, Mode, RoundLog, SensorState,
};
