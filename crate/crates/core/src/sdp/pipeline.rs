//! End-to-end centralized localization: build, optionally decompose, solve, read out.

use serde::Serialize;

use super::admm::{solve, SdpSolution, SolveError, SolveOptions};
use super::builder::{
    build_disturbed_program_with, build_exact_program, build_noisy_program, DisturbedObjective,
};
use super::decompose::decompose_program;
use super::extract::{extract_positions, RankDiagnostics};
use super::program::{BlockRole, ConicProgram, RankTarget};
use super::rank::{iterative_rank_minimization, RankOptions};
use crate::error::{Error, Result};
use crate::graphkit::is_acute_triangulated;
use crate::network::{AngleData, Annotation, SensorNetwork};
use crate::Point2;

/// Which rank targets the iterative rank minimization enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    /// Plain relaxation.
    None,
    /// `rank(D) = 1` only.
    D,
    /// `rank(Lambda_j) = 1` only.
    Lambda,
    /// `rank(Y) = 2` only: the Gram block of a planar configuration.
    Gram,
    All,
}

impl std::str::FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RankMode::None),
            "d" => Ok(RankMode::D),
            "lambda" => Ok(RankMode::Lambda),
            "gram" => Ok(RankMode::Gram),
            "all" => Ok(RankMode::All),
            other => Err(Error::PreconditionViolated(format!(
                "unknown rank mode `{other}`"
            ))),
        }
    }
}

impl RankMode {
    /// `Lambda` for likelihood programs on acute-triangulated grounded frameworks (the
    /// distance target is implied there), `All` for other likelihood programs, `Gram`
    /// for disturbed programs (the interval-feasible set of the relaxation contains
    /// lifted configurations far from any planar one) and `None` for exact programs.
    pub fn auto(net: &SensorNetwork, data: &AngleData) -> Self {
        match data.annotation {
            Annotation::Gaussian { .. } if is_acute_triangulated(&net.grounded_framework()) => {
                RankMode::Lambda
            }
            Annotation::Gaussian { .. } => RankMode::All,
            Annotation::Bounded { .. } => RankMode::Gram,
            Annotation::Exact => RankMode::None,
        }
    }

    fn keep(&self, role: BlockRole) -> bool {
        match (self, role) {
            (RankMode::None, _) => false,
            (RankMode::All, _) => true,
            (RankMode::D, r) => r == BlockRole::Distance,
            (RankMode::Lambda, r) => matches!(r, BlockRole::Likelihood(_)),
            (RankMode::Gram, r) => r == BlockRole::Gram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdpOptions {
    pub decompose: bool,
    /// `None` selects [`RankMode::auto`].
    pub rank_mode: Option<RankMode>,
    /// Objective of programs built from bounded data.
    pub disturbed_objective: DisturbedObjective,
    pub solver: SolveOptions,
    pub rank: RankOptions,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            decompose: false,
            rank_mode: None,
            disturbed_objective: DisturbedObjective::default(),
            solver: SolveOptions::default(),
            rank: RankOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Converged,
    /// The solver hit its iteration limit; the best iterate was read out.
    MaxIterations,
    /// Rank minimization exhausted its outer iterations; the last iterate was read out.
    RankNotReached,
}

#[derive(Debug, Clone)]
pub struct SdpOutcome {
    pub positions: Vec<Point2>,
    pub diagnostics: RankDiagnostics,
    pub solution: SdpSolution,
    pub status: SdpStatus,
    pub rank_mode: RankMode,
    /// `r_l` per outer iteration of rank minimization.
    pub rank_trace: Vec<f64>,
    /// Iterations of the final solve.
    pub iterations: usize,
    pub wall_time_ms: f64,
}

impl SdpOutcome {
    pub fn converged(&self) -> bool {
        self.status == SdpStatus::Converged
    }
}

/// The program matching the regime of `data`.
pub fn build_program(
    net: &SensorNetwork,
    data: &AngleData,
    disturbed: DisturbedObjective,
) -> Result<ConicProgram> {
    match data.annotation {
        Annotation::Exact => build_exact_program(net, data),
        Annotation::Gaussian { .. } => build_noisy_program(net, data),
        Annotation::Bounded { .. } => build_disturbed_program_with(net, data, disturbed),
    }
}

/// Builds, optionally decomposes, and solves the program for `net` and `data`.
///
/// Solver non-convergence is reported through [`SdpOutcome::status`]; errors are
/// precondition or numerical failures.
pub fn localize_sdp(
    net: &SensorNetwork,
    data: &AngleData,
    opts: &SdpOptions,
) -> Result<SdpOutcome> {
    let start = std::time::Instant::now();
    let mut prog = build_program(net, data, opts.disturbed_objective)?;
    if opts.decompose {
        prog = decompose_program(&prog, net)?;
    }
    let mode = opts.rank_mode.unwrap_or_else(|| RankMode::auto(net, data));
    let roles: Vec<BlockRole> = prog.blocks.iter().map(|b| b.role).collect();
    if mode == RankMode::Gram {
        prog.rank_targets.push(RankTarget {
            block: prog.gram_block(),
            rank: 2,
        });
    }
    prog.rank_targets.retain(|t| mode.keep(roles[t.block]));
    let (solution, status, rank_trace, iterations) = if prog.rank_targets.is_empty() {
        match solve(&prog, &opts.solver) {
            Ok(s) => {
                let it = s.iterations;
                (s, SdpStatus::Converged, vec![], it)
            }
            Err(SolveError::MaxIterations(s)) => {
                let it = s.iterations;
                (*s, SdpStatus::MaxIterations, vec![], it)
            }
            Err(e) => return Err(into_core(e)),
        }
    } else {
        match iterative_rank_minimization(&prog, &opts.rank) {
            Ok(m) => {
                let it = m.solution.iterations;
                (m.solution, SdpStatus::Converged, m.trace, it)
            }
            Err(SolveError::NoConvergence { trace, best }) => {
                let it = best.iterations;
                (*best, SdpStatus::RankNotReached, trace, it)
            }
            Err(SolveError::MaxIterations(s)) => {
                let it = s.iterations;
                (*s, SdpStatus::MaxIterations, vec![], it)
            }
            Err(e) => return Err(into_core(e)),
        }
    };
    let (positions, diagnostics) = extract_positions(&solution, net);
    Ok(SdpOutcome {
        positions,
        diagnostics,
        solution,
        status,
        rank_mode: mode,
        rank_trace,
        iterations,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn into_core(e: SolveError) -> Error {
    match e {
        SolveError::Core(c) => c,
        other => Error::NumericalFailure(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{generate_network, NetworkKind};
    use crate::network::{synthesize_measurements, Regime};
    use crate::sdp::Verdict;

    #[test]
    fn rank_modes_parse() {
        assert_eq!("lambda".parse::<RankMode>().unwrap(), RankMode::Lambda);
        assert!("rank".parse::<RankMode>().is_err());
    }

    #[test]
    fn auto_mode_follows_regime_and_geometry() {
        let net = generate_network(NetworkKind::AcuteTriangulated, 6, 3, 0).unwrap();
        let exact = synthesize_measurements(&net, Regime::Exact, 0).unwrap();
        let noisy = synthesize_measurements(&net, Regime::Gaussian { sigma: 0.01 }, 0).unwrap();
        assert_eq!(RankMode::auto(&net, &exact), RankMode::None);
        assert_eq!(RankMode::auto(&net, &noisy), RankMode::Lambda);
    }

    #[test]
    fn exact_pipeline_certifies() {
        let net = generate_network(NetworkKind::AcuteTriangulated, 7, 3, 3).unwrap();
        let data = synthesize_measurements(&net, Regime::Exact, 3).unwrap();
        let out = localize_sdp(
            &net,
            &data,
            &SdpOptions {
                decompose: true,
                ..SdpOptions::default()
            },
        )
        .unwrap();
        assert!(out.converged());
        assert_eq!(out.diagnostics.verdict, Verdict::ExactRank3);
        for (x, t) in out.positions.iter().zip(net.unknown_positions()) {
            assert!((*x - t).norm() < 1e-5);
        }
    }
}
