use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anglenet::blp::{check_blp_preconditions, run_blp, BlpError, BlpRun, BlpWorld};
use anglenet::experiment::{
    generate_network, run_experiment, write_csv, ExperimentSpec, Generator, NetworkKind,
    SolverChoice,
};
use anglenet::graphkit::{is_acute_triangulated, is_chordal, maximal_cliques};
use anglenet::network::{load_network, save_network};
use anglenet::rigidity::{
    certify_angle_fixability, is_angle_localizable, is_infinitesimally_angle_rigid,
};
use anglenet::sdp::{localize_sdp, RankMode, SdpOptions, SdpStatus};
use anglenet::{synthesize_measurements, Error, Regime, SensorNetwork};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "anglenet",
    version,
    about = "Angle-based sensor network localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed of network generation and measurement synthesis.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Numerical tolerance of the subcommand (rank cutoff, solver tolerance or collinearity).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    AcuteTriangulated,
    Bilateration,
}

impl From<Kind> for NetworkKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::AcuteTriangulated => NetworkKind::AcuteTriangulated,
            Kind::Bilateration => NetworkKind::Bilateration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Exact,
    Gaussian,
    Bounded,
}

#[derive(Args)]
struct RegimeOpts {
    #[arg(long, value_enum, default_value_t = RegimeArg::Exact)]
    regime: RegimeArg,
    /// Standard deviation of the cosine noise (gaussian regime).
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    /// Radius of the bearing disturbance (bounded regime).
    #[arg(long, default_value_t = 0.01)]
    tau_max: f64,
}

impl RegimeOpts {
    fn regime(&self) -> Regime {
        match self.regime {
            RegimeArg::Exact => Regime::Exact,
            RegimeArg::Gaussian => Regime::Gaussian { sigma: self.sigma },
            RegimeArg::Bounded => Regime::Bounded {
                tau_max: self.tau_max,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network and write it as a network file.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        n_a: usize,
        /// Give every sensor a random local frame and store the frames in the file.
        #[arg(long)]
        frames: bool,
    },
    /// Rigidity, fixability and localizability report of a network file.
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Centralized localization through the semidefinite relaxation.
    SolveSdp {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        regime: RegimeOpts,
        #[arg(long)]
        decompose: bool,
        /// none, d, lambda, gram or all; chosen from the regime when absent.
        #[arg(long)]
        rank_mode: Option<String>,
    },
    /// Distributed bilateration localization protocol.
    SimulateBlp {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        regime: RegimeOpts,
        /// Defaults to the number of unknown sensors.
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Run even when the protocol preconditions do not hold.
        #[arg(long)]
        force: bool,
        /// Also write per-round sizes of the localized set as CSV to this file.
        #[arg(long)]
        rounds_csv: Option<PathBuf>,
    },
    /// Seeded batch of generate, solve and evaluate runs.
    Experiment {
        /// acute_triangulated, bilateration or a network file path via --input.
        #[arg(long, value_enum, default_value_t = Kind::AcuteTriangulated)]
        kind: Kind,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        n_a: usize,
        /// Load the network from this file instead of generating one.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        regime: RegimeOpts,
        /// sdp, sdp_decomposed, blp or blp_and_sdp.
        #[arg(long, default_value = "sdp")]
        solver: String,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        /// Fill the time_ms column; without it reruns give identical output.
        #[arg(long)]
        timing: bool,
    },
}

enum Failure {
    Precondition(String),
    NonConvergence(String),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Other(e.into()),
            Error::NumericalFailure(_) => Failure::NonConvergence(e.to_string()),
            other => Failure::Precondition(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Other(anyhow::anyhow!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn load(path: &Path) -> Result<SensorNetwork, Failure> {
    load_network(path).map_err(|e| match e {
        Error::Io(m) => Failure::Other(anyhow::anyhow!("reading {}: {m}", path.display())),
        other => other.into(),
    })
}

fn analyze(cli: &Cli, input: &Path) -> Result<(), Failure> {
    let net = load(input)?;
    let grounded = net.grounded_framework();
    let tol = cli.tol.unwrap_or(anglenet::rigidity::RANK_TOL);
    let report = is_infinitesimally_angle_rigid(&grounded, tol)?;
    let cert = certify_angle_fixability(&grounded);
    let loc = is_angle_localizable(&net);
    let blp = check_blp_preconditions(&net);
    let cliques = maximal_cliques(net.grounded());
    let v = json!({
        "n": net.n(),
        "n_anchors": net.n_anchors(),
        "edges": net.graph().edge_count(),
        "rank": report.jacobian_rank,
        "required_rank": report.required_rank,
        "infinitesimally_rigid": report.infinitesimally_rigid,
        "fixability_status": cert.status,
        "fixability_reason": cert.reason,
        "ordering": cert.order(),
        "anchors_collinear": net.anchors_collinear(),
        "localizable": loc.localizable,
        "localizability_reason": loc.reason,
        "acute_triangulated": is_acute_triangulated(&grounded),
        "grounded_chordal": is_chordal(net.grounded()),
        "grounded_maximal_cliques": cliques.cliques.len(),
        "blp_preconditions": blp,
    });
    let text = match cli.format {
        Format::Json => pretty(&v),
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, val) in v.as_object().expect("object") {
                if !val.is_object() && !val.is_array() {
                    let _ = writeln!(s, "{k},{}", val.to_string().trim_matches('"'));
                }
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn solve_sdp(
    cli: &Cli,
    input: &Path,
    regime: &RegimeOpts,
    decompose: bool,
    rank_mode: Option<&str>,
) -> Result<(), Failure> {
    let net = load(input)?;
    let data = synthesize_measurements(&net, regime.regime(), cli.seed)?;
    let mut opts = SdpOptions {
        decompose,
        rank_mode: rank_mode.map(str::parse::<RankMode>).transpose()?,
        ..SdpOptions::default()
    };
    if let Some(t) = cli.tol {
        opts.solver.tol = t;
        opts.rank.solver.tol = t;
    }
    let out = localize_sdp(&net, &data, &opts)?;
    let s = &out.solution;
    let unknowns: Vec<usize> = net.unknowns().collect();
    let errors: Vec<f64> = out
        .positions
        .iter()
        .zip(net.unknown_positions())
        .map(|(x, t)| (*x - t).norm())
        .collect();
    let text = match cli.format {
        Format::Json => pretty(&json!({
            "regime": data.regime_name(),
            "status": out.status,
            "verdict": out.diagnostics.verdict.name(),
            "rank_mode": out.rank_mode,
            "unknowns": unknowns,
            "positions": out.positions,
            "position_errors": errors,
            "error": anglenet::experiment::evaluate(&net.unknown_positions(), &out.positions)?,
            "residuals": {
                "primal": s.primal_residual,
                "dual": s.dual_residual,
                "duality_gap": s.duality_gap,
                "affine": s.affine_residual,
            },
            "spectra": { "y": out.diagnostics.eigen_y, "d": out.diagnostics.eigen_d },
            "rank_y": out.diagnostics.rank_y,
            "rank_d": out.diagnostics.rank_d,
            "rank_z": out.diagnostics.rank_z,
            "gram_residual": out.diagnostics.gram_residual,
            "rank_trace": out.rank_trace,
            "iterations": out.iterations,
            "wall_time_ms": out.wall_time_ms,
        })),
        Format::Csv => {
            let mut t = String::from("id,x,y,error\n");
            for ((i, x), e) in unknowns.iter().zip(&out.positions).zip(&errors) {
                let _ = writeln!(t, "{i},{:e},{:e},{e:e}", x.x, x.y);
            }
            t
        }
    };
    emit(cli.out.as_deref(), &text)?;
    match out.status {
        SdpStatus::Converged => Ok(()),
        st => Err(Failure::NonConvergence(format!("solver status {st:?}"))),
    }
}

fn rounds_table(run: &BlpRun, n_anchors: usize) -> String {
    let mut t = String::from("round,newly_localized,localized,messages,cumulative_error\n");
    let mut localized = n_anchors;
    for log in &run.logs {
        localized += log.newly_localized.len();
        let _ = writeln!(
            t,
            "{},{},{localized},{},{:e}",
            log.round,
            log.newly_localized.len(),
            log.messages_sent,
            log.cumulative_error
        );
    }
    t
}

fn simulate_blp(
    cli: &Cli,
    input: &Path,
    regime: &RegimeOpts,
    max_rounds: Option<usize>,
    force: bool,
    rounds_csv: Option<&Path>,
) -> Result<(), Failure> {
    let net = load(input)?;
    let pre = check_blp_preconditions(&net);
    if !pre.satisfied && !force {
        return Err(Failure::Precondition(format!(
            "protocol preconditions fail: {} (use --force to run anyway)",
            pre.reason
        )));
    }
    let data = synthesize_measurements(&net, regime.regime(), cli.seed)?;
    let mut world = BlpWorld::new(&net, &data)?;
    if let Some(t) = cli.tol {
        world.collinear_tol = t;
    }
    let result = run_blp(&mut world, max_rounds);
    let (run, failure) = match &result {
        Ok(r) => (r, None),
        Err(e) => (e.partial_run(), Some(e)),
    };
    let stalled = failure.map(|e| match e {
        BlpError::Stalled {
            round, unlocalized, ..
        } => {
            json!({"kind": "stalled", "round": round, "unlocalized": unlocalized})
        }
        BlpError::RoundLimit {
            limit, unlocalized, ..
        } => {
            json!({"kind": "round_limit", "limit": limit, "unlocalized": unlocalized})
        }
    });
    let table = rounds_table(run, net.n_anchors());
    if let Some(p) = rounds_csv {
        emit(Some(p), &table)?;
    }
    let text = match cli.format {
        Format::Json => pretty(&json!({
            "regime": data.regime_name(),
            "preconditions": pre,
            "converged": failure.is_none(),
            "convergence_round": run.convergence_round,
            "rounds": run.logs,
            "positions": run.positions,
            "unknown_errors": run.unknown_errors,
            "localization_rounds": run.localization_rounds(net.n_anchors()),
            "error": run.error(),
            "failure": stalled,
        })),
        Format::Csv => table,
    };
    emit(cli.out.as_deref(), &text)?;
    match failure {
        None => Ok(()),
        Some(e) => Err(Failure::NonConvergence(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    cli: &Cli,
    kind: Kind,
    n: usize,
    n_a: usize,
    input: Option<&Path>,
    regime: &RegimeOpts,
    solver: &str,
    repetitions: usize,
    timing: bool,
) -> Result<(), Failure> {
    let generator = match (input, kind) {
        (Some(p), _) => Generator::FromFile {
            path: p.to_path_buf(),
        },
        (None, Kind::AcuteTriangulated) => Generator::AcuteTriangulated { n, n_a },
        (None, Kind::Bilateration) => Generator::Bilateration { n, n_a },
    };
    let choice: SolverChoice = solver.parse()?;
    let mut spec = ExperimentSpec::new(generator, regime.regime(), choice, cli.seed, repetitions);
    if let Some(t) = cli.tol {
        spec.sdp.solver.tol = t;
        spec.sdp.rank.solver.tol = t;
    }
    let mut rows = run_experiment(&spec)?;
    if !timing {
        rows.iter_mut().for_each(|r| r.time_ms = 0.0);
    }
    let text = match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf, timing)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Json => pretty(&json!({ "spec": spec, "rows": rows })),
    };
    emit(cli.out.as_deref(), &text)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Generate {
            kind,
            n,
            n_a,
            frames,
        } => {
            let mut net = generate_network((*kind).into(), *n, *n_a, cli.seed)?;
            if *frames {
                net = net.randomize_frames(cli.seed);
            }
            match &cli.out {
                Some(p) => save_network(&net, p, *frames)?,
                None => {
                    let file = anglenet::network::NetworkFile::from_network(&net, *frames);
                    print!("{}\n", file.to_json());
                }
            }
            Ok(())
        }
        Command::Analyze { input } => analyze(cli, input),
        Command::SolveSdp {
            input,
            regime,
            decompose,
            rank_mode,
        } => solve_sdp(cli, input, regime, *decompose, rank_mode.as_deref()),
        Command::SimulateBlp {
            input,
            regime,
            max_rounds,
            force,
            rounds_csv,
        } => simulate_blp(
            cli,
            input,
            regime,
            *max_rounds,
            *force,
            rounds_csv.as_deref(),
        ),
        Command::Experiment {
            kind,
            n,
            n_a,
            input,
            regime,
            solver,
            repetitions,
            timing,
        } => experiment(
            cli,
            *kind,
            *n,
            *n_a,
            input.as_deref(),
            regime,
            solver,
            *repetitions,
            *timing,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Precondition(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NonConvergence(m)) => {
            eprintln!("not converged: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
