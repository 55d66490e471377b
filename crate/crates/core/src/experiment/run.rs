//! Evaluation metric and seeded batch experiments with CSV output.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generate::{generate_network, NetworkKind};
use crate::blp::{simulate, BlpError};
use crate::error::{Error, Result};
use crate::network::{load_network, synthesize_measurements, Regime, SensorNetwork};
use crate::sdp::{localize_sdp, SdpOptions, SdpStatus};
use crate::Point2;

/// Root-sum-square distance between true and estimated unknown positions.
pub fn evaluate(truth: &[Point2], estimate: &[Point2]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: estimate.len(),
        });
    }
    Ok(truth
        .iter()
        .zip(estimate)
        .map(|(a, b)| (*a - *b).norm().powi(2))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Generator {
    AcuteTriangulated { n: usize, n_a: usize },
    Bilateration { n: usize, n_a: usize },
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sdp,
    SdpDecomposed,
    Blp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sdp => "sdp",
            Method::SdpDecomposed => "sdp_decomposed",
            Method::Blp => "blp",
        }
    }
}

/// Solver selection of an experiment; `blp_and_sdp` runs both on the same data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Sdp,
    SdpDecomposed,
    Blp,
    BlpAndSdp,
}

impl SolverChoice {
    pub fn methods(&self) -> Vec<Method> {
        match self {
            SolverChoice::Sdp => vec![Method::Sdp],
            SolverChoice::SdpDecomposed => vec![Method::SdpDecomposed],
            SolverChoice::Blp => vec![Method::Blp],
            SolverChoice::BlpAndSdp => vec![Method::Blp, Method::Sdp],
        }
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdp" => Ok(SolverChoice::Sdp),
            "sdp_decomposed" => Ok(SolverChoice::SdpDecomposed),
            "blp" => Ok(SolverChoice::Blp),
            "blp_and_sdp" => Ok(SolverChoice::BlpAndSdp),
            other => Err(Error::PreconditionViolated(format!(
                "unknown solver `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub generator: Generator,
    pub regime: Regime,
    pub solver: SolverChoice,
    pub seed: u64,
    pub repetitions: usize,
    pub sdp: SdpOptions,
    /// Round limit of the protocol; `None` means the number of unknowns.
    pub max_rounds: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(
        generator: Generator,
        regime: Regime,
        solver: SolverChoice,
        seed: u64,
        repetitions: usize,
    ) -> Self {
        Self {
            generator,
            regime,
            solver,
            seed,
            repetitions,
            sdp: SdpOptions::default(),
            max_rounds: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::PreconditionViolated(
                "repetitions must be at least 1".into(),
            ));
        }
        match self.generator {
            Generator::AcuteTriangulated { n_a, .. } | Generator::Bilateration { n_a, .. }
                if n_a < 3 =>
            {
                Err(Error::PreconditionViolated(format!(
                    "need at least 3 anchors, got {n_a}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run: usize,
    pub method: String,
    pub n: usize,
    pub n_a: usize,
    /// Empty when the method produced no estimate for every unknown.
    pub error: Option<f64>,
    /// Protocol rounds, outer rank-minimization iterations, or solver iterations.
    pub metric: Option<f64>,
    pub time_ms: f64,
    pub verdict: String,
}

/// Seeds of repetition `rep`: one for the network, one for the measurements.
pub fn repetition_seeds(seed: u64, rep: usize) -> (u64, u64) {
    let base = seed.wrapping_add(rep as u64);
    (base, base ^ 0x5851_F42D_4C95_7F2D)
}

fn network_for(spec: &ExperimentSpec, seed: u64) -> Result<SensorNetwork> {
    match &spec.generator {
        Generator::AcuteTriangulated { n, n_a } => {
            generate_network(NetworkKind::AcuteTriangulated, *n, *n_a, seed)
        }
        Generator::Bilateration { n, n_a } => {
            generate_network(NetworkKind::Bilateration, *n, *n_a, seed)
        }
        Generator::FromFile { path } => load_network(path),
    }
}

fn failed(
    run: usize,
    method: Method,
    n: usize,
    n_a: usize,
    e: impl std::fmt::Display,
) -> ResultRow {
    ResultRow {
        run,
        method: method.name().into(),
        n,
        n_a,
        error: None,
        metric: None,
        time_ms: 0.0,
        verdict: format!("error: {e}"),
    }
}

fn run_method(
    spec: &ExperimentSpec,
    method: Method,
    run: usize,
    net: &SensorNetwork,
    data_seed: u64,
) -> ResultRow {
    let (n, n_a) = (net.n(), net.n_anchors());
    let data = match synthesize_measurements(net, spec.regime, data_seed) {
        Ok(d) => d,
        Err(e) => return failed(run, method, n, n_a, e),
    };
    let truth = net.unknown_positions();
    let start = Instant::now();
    let mut row = match method {
        Method::Blp => {
            let (run_out, verdict) = match simulate(net, &data, spec.max_rounds) {
                Ok(Ok(r)) => (r, "converged".to_string()),
                Ok(Err(e)) => {
                    let name = match e {
                        BlpError::Stalled { .. } => "stalled",
                        BlpError::RoundLimit { .. } => "round_limit",
                    };
                    (e.partial_run().clone(), name.to_string())
                }
                Err(e) => return failed(run, method, n, n_a, e),
            };
            ResultRow {
                run,
                method: method.name().into(),
                n,
                n_a,
                error: run_out.error(),
                metric: Some(run_out.logs.len() as f64),
                time_ms: 0.0,
                verdict,
            }
        }
        Method::Sdp | Method::SdpDecomposed => {
            let opts = SdpOptions {
                decompose: method == Method::SdpDecomposed,
                ..spec.sdp
            };
            match localize_sdp(net, &data, &opts) {
                Ok(out) => {
                    let verdict = match out.status {
                        SdpStatus::Converged => out.diagnostics.verdict.name().to_string(),
                        SdpStatus::MaxIterations => "max_iterations".into(),
                        SdpStatus::RankNotReached => "rank_not_reached".into(),
                    };
                    let metric = if out.rank_trace.is_empty() {
                        out.iterations
                    } else {
                        out.rank_trace.len()
                    };
                    ResultRow {
                        run,
                        method: method.name().into(),
                        n,
                        n_a,
                        error: evaluate(&truth, &out.positions).ok(),
                        metric: Some(metric as f64),
                        time_ms: 0.0,
                        verdict,
                    }
                }
                Err(e) => failed(run, method, n, n_a, e),
            }
        }
    };
    row.time_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Runs every repetition and method. Failures are recorded in the verdict column and
/// never abort the batch; rows are ordered by run id, then method.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let methods = spec.solver.methods();
    let mut rows = Vec::with_capacity(spec.repetitions * methods.len());
    for rep in 0..spec.repetitions {
        let (net_seed, data_seed) = repetition_seeds(spec.seed, rep);
        match network_for(spec, net_seed) {
            Ok(net) => rows.extend(
                methods
                    .iter()
                    .map(|&m| run_method(spec, m, rep, &net, data_seed)),
            ),
            Err(e) => {
                let (n, n_a) = match spec.generator {
                    Generator::AcuteTriangulated { n, n_a }
                    | Generator::Bilateration { n, n_a } => (n, n_a),
                    Generator::FromFile { .. } => (0, 0),
                };
                rows.extend(methods.iter().map(|&m| failed(rep, m, n, n_a, &e)));
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 8] = [
    "run", "method", "n", "n_a", "error", "metric", "time_ms", "verdict",
];

/// Writes `rows` as CSV. Without `timing` the `time_ms` column is left empty so that
/// reruns with the same spec produce identical bytes.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let plain = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let time = if timing {
            format!("{:.3}", r.time_ms)
        } else {
            String::new()
        };
        w.write_record([
            r.run.to_string(),
            r.method.clone(),
            r.n.to_string(),
            r.n_a.to_string(),
            opt(r.error),
            plain(r.metric),
            time,
            r.verdict.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        let t = [Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)];
        assert_eq!(evaluate(&t, &t).unwrap(), 0.0);
        assert!((evaluate(&t[..1], &[Point2::new(0.3, 0.4)]).unwrap() - 0.5).abs() < 1e-15);
        let off = [Point2::new(1.0, 0.0), Point2::new(2.0, 1.0)];
        assert!((evaluate(&t, &off).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            evaluate(&t, &off[..1]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        );
    }

    #[test]
    fn blp_and_sdp_expands_to_two_methods() {
        assert_eq!(
            SolverChoice::BlpAndSdp.methods(),
            vec![Method::Blp, Method::Sdp]
        );
        assert_eq!(
            "sdp_decomposed".parse::<SolverChoice>().unwrap(),
            SolverChoice::SdpDecomposed
        );
    }

    #[test]
    fn failures_are_recorded_not_raised() {
        let spec = ExperimentSpec::new(
            Generator::FromFile {
                path: "/nonexistent/network.json".into(),
            },
            Regime::Exact,
            SolverChoice::BlpAndSdp,
            0,
            2,
        );
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows
            .iter()
            .all(|r| r.verdict.starts_with("error") && r.error.is_none()));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = ExperimentSpec::new(
            Generator::Bilateration { n: 10, n_a: 2 },
            Regime::Exact,
            SolverChoice::Blp,
            0,
            1,
        );
        assert!(run_experiment(&spec).is_err());
        spec.generator = Generator::Bilateration { n: 10, n_a: 3 };
        spec.repetitions = 0;
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn csv_is_reproducible() {
        let spec = ExperimentSpec::new(
            Generator::Bilateration { n: 30, n_a: 3 },
            Regime::Exact,
            SolverChoice::Blp,
            4,
            3,
        );
        let render = || {
            let mut buf = Vec::new();
            write_csv(&run_experiment(&spec).unwrap(), &mut buf, false).unwrap();
            buf
        };
        let a = render();
        assert_eq!(a, render());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("run,method,n,n_a,error,metric,time_ms,verdict\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
