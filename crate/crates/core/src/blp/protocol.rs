//! Synchronous simulation of the bilateration localization protocol.
//!
//! A round has three phases, each reading only what the previous phase delivered:
//!
//! 1. every localized sensor sends its position to all sensing neighbors, so each
//!    localized sensor learns which neighbors are localized;
//! 2. every localized sensor that has two localized neighbors in non-collinear directions
//!    computes the global bearing to each neighbor it did not hear from and sends it
//!    together with its position;
//! 3. every unlocalized sensor holding two bearings from neighbors whose directions are
//!    not collinear intersects the two rays and switches to localized mode.
//!
//! Ties are broken by the lowest neighbor ids. Messages only travel sensing edges, and a
//! sensor only reads its own local bearings and its inbox.

use std::collections::BTreeMap;

use serde::Serialize;

use super::linear::{fg_solve_with, fx_solve_with, BLP_COLLINEAR_TOL};
use crate::error::Result;
use crate::geometry::{bearing, Frame, Point2};
use crate::graph::Framework;
use crate::graphkit::find_nondegenerate_ordering;
use crate::network::{AngleData, SensorNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Localized,
    Unlocalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MessageKind {
    Position { x: Point2 },
    PositionAndBearing { x: Point2, g: Point2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub kind: MessageKind,
    pub round: usize,
}

impl Message {
    pub fn position(&self) -> Point2 {
        match self.kind {
            MessageKind::Position { x } | MessageKind::PositionAndBearing { x, .. } => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorState {
    pub id: usize,
    pub mode: Mode,
    pub position: Option<Point2>,
    /// Measured bearings to sensing neighbors, in this sensor's frame.
    pub bearings: BTreeMap<usize, Point2>,
    /// Messages delivered in the current round.
    pub inbox: Vec<Message>,
    /// Kept for inspection only; the protocol never reads it.
    pub frame: Frame,
}

impl SensorState {
    pub fn is_localized(&self) -> bool {
        self.mode == Mode::Localized
    }

    fn positions_heard(&self) -> BTreeMap<usize, Point2> {
        self.inbox.iter().map(|m| (m.from, m.position())).collect()
    }

    /// Phase 2 for a localized sensor: the lowest-id pair of localized neighbors whose
    /// global bearings span the plane, then one bearing message per silent neighbor.
    fn bearing_messages(&self, round: usize, tol: f64) -> Vec<Message> {
        let Some(x_i) = self.position else {
            return vec![];
        };
        let heard = self.positions_heard();
        let global: Vec<(usize, Point2)> = heard
            .iter()
            .filter(|(j, _)| self.bearings.contains_key(j))
            .filter_map(|(&j, &x_j)| bearing(x_i, x_j).ok().map(|g| (j, g)))
            .collect();
        let mut pair = None;
        'search: for a in 0..global.len() {
            for b in a + 1..global.len() {
                if global[a].1.cross(global[b].1).abs() > tol {
                    pair = Some((global[a], global[b]));
                    break 'search;
                }
            }
        }
        let Some(((i1, g1), (i2, g2))) = pair else {
            return vec![];
        };
        let (l1, l2) = (self.bearings[&i1], self.bearings[&i2]);
        self.bearings
            .iter()
            .filter(|(k, _)| !heard.contains_key(k))
            .filter_map(|(&k, &lk)| {
                let g = fg_solve_with(g1, g2, l1.dot(lk), l2.dot(lk), tol).ok()?;
                Some(Message {
                    from: self.id,
                    to: k,
                    kind: MessageKind::PositionAndBearing { x: x_i, g },
                    round,
                })
            })
            .collect()
    }

    /// Phase 3 for an unlocalized sensor.
    fn try_localize(&self, tol: f64) -> Option<Point2> {
        let rays: Vec<(usize, Point2, Point2)> = self
            .inbox
            .iter()
            .filter_map(|m| match m.kind {
                MessageKind::PositionAndBearing { x, g } if self.bearings.contains_key(&m.from) => {
                    Some((m.from, (x, g)))
                }
                _ => None,
            })
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .map(|(i, (x, g))| (i, x, g))
            .collect();
        for a in 0..rays.len() {
            for b in a + 1..rays.len() {
                let (i, x_i, g_i) = rays[a];
                let (j, x_j, g_j) = rays[b];
                // collinearity of x_i - x_k and x_j - x_k, as sensed locally
                if self.bearings[&i].cross(self.bearings[&j]).abs() <= tol {
                    continue;
                }
                if let Ok(x) = fx_solve_with(x_i, x_j, g_i, g_j, tol) {
                    return Some(x);
                }
            }
        }
        None
    }
}

/// Per-round summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    /// Sensors that switched to localized mode in this round, ascending.
    pub newly_localized: Vec<usize>,
    pub messages_sent: usize,
    /// Root-sum-square error over the unknowns localized so far.
    pub cumulative_error: f64,
}

/// The simulated network: sensor state machines plus the ground truth used only for logs.
#[derive(Debug, Clone)]
pub struct BlpWorld {
    pub sensors: Vec<SensorState>,
    pub round: usize,
    pub collinear_tol: f64,
    truth: Vec<Point2>,
    n_anchors: usize,
    neighbors: Vec<Vec<usize>>,
}

impl BlpWorld {
    /// Anchors start localized at their true positions. Each sensor gets the measured
    /// local bearings of its sensing edges from `data`; bearings of grounded-only anchor
    /// pairs are not measured and are ignored.
    pub fn new(net: &SensorNetwork, data: &AngleData) -> Result<Self> {
        let g = net.graph();
        let mut sensors = Vec::with_capacity(net.n());
        for v in 1..=net.n() {
            let mut bearings = BTreeMap::new();
            for u in g.neighbors(v) {
                let b = data
                    .local_bearings
                    .get(&(v, u))
                    .copied()
                    .map(Ok)
                    .unwrap_or_else(|| net.local_bearing(v, u).map(|l| l.direction))?;
                bearings.insert(u, b);
            }
            let anchor = net.is_anchor(v);
            sensors.push(SensorState {
                id: v,
                mode: if anchor {
                    Mode::Localized
                } else {
                    Mode::Unlocalized
                },
                position: anchor.then(|| net.pos(v)),
                bearings,
                inbox: Vec::new(),
                frame: *net.frame(v),
            });
        }
        Ok(Self {
            sensors,
            round: 0,
            collinear_tol: BLP_COLLINEAR_TOL,
            truth: (1..=net.n()).map(|v| net.pos(v)).collect(),
            n_anchors: net.n_anchors(),
            neighbors: (1..=net.n()).map(|v| g.neighbors(v).collect()).collect(),
        })
    }

    pub fn n_unknowns(&self) -> usize {
        self.sensors.len() - self.n_anchors
    }

    pub fn unlocalized(&self) -> Vec<usize> {
        self.sensors
            .iter()
            .filter(|s| !s.is_localized())
            .map(|s| s.id)
            .collect()
    }

    /// Current estimates, `None` for unlocalized sensors.
    pub fn positions(&self) -> Vec<Option<Point2>> {
        self.sensors.iter().map(|s| s.position).collect()
    }

    /// Distance to the truth per unknown, `None` while unlocalized.
    pub fn unknown_errors(&self) -> Vec<Option<f64>> {
        self.sensors[self.n_anchors..]
            .iter()
            .map(|s| s.position.map(|x| (x - self.truth[s.id - 1]).norm()))
            .collect()
    }

    fn cumulative_error(&self) -> f64 {
        self.unknown_errors()
            .into_iter()
            .flatten()
            .map(|e| e * e)
            .sum::<f64>()
            .sqrt()
    }

    fn deliver(&mut self, msgs: Vec<Message>) -> usize {
        let count = msgs.len();
        for m in msgs {
            self.sensors[m.to - 1].inbox.push(m);
        }
        count
    }

    /// Runs one synchronous round.
    pub fn step_round(&mut self) -> RoundLog {
        self.round += 1;
        let round = self.round;
        let tol = self.collinear_tol;
        for s in &mut self.sensors {
            s.inbox.clear();
        }
        let hello: Vec<Message> = self
            .sensors
            .iter()
            .filter_map(|s| s.position.map(|x| (s, x)))
            .flat_map(|(s, x)| {
                self.neighbors[s.id - 1].iter().map(move |&to| Message {
                    from: s.id,
                    to,
                    kind: MessageKind::Position { x },
                    round,
                })
            })
            .collect();
        let mut sent = self.deliver(hello);
        let bearings: Vec<Message> = self
            .sensors
            .iter()
            .flat_map(|s| s.bearing_messages(round, tol))
            .collect();
        sent += self.deliver(bearings);
        let solved: Vec<(usize, Point2)> = self
            .sensors
            .iter()
            .filter(|s| !s.is_localized())
            .filter_map(|s| s.try_localize(tol).map(|x| (s.id, x)))
            .collect();
        for &(v, x) in &solved {
            let s = &mut self.sensors[v - 1];
            s.position = Some(x);
            s.mode = Mode::Localized;
        }
        RoundLog {
            round,
            newly_localized: solved.iter().map(|&(v, _)| v).collect(),
            messages_sent: sent,
            cumulative_error: self.cumulative_error(),
        }
    }
}

/// Result of a protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlpRun {
    pub logs: Vec<RoundLog>,
    /// Estimates of all sensors (anchors included), `None` where unlocalized.
    pub positions: Vec<Option<Point2>>,
    /// Distance to the truth per unknown.
    pub unknown_errors: Vec<Option<f64>>,
    /// Round in which the last unknown was localized (0 when there are none).
    pub convergence_round: Option<usize>,
}

impl BlpRun {
    /// Root-sum-square error over the unknowns; `None` unless all were localized.
    pub fn error(&self) -> Option<f64> {
        let mut sum = 0.0;
        for e in &self.unknown_errors {
            sum += (*e)? * (*e)?;
        }
        Some(sum.sqrt())
    }

    /// Round in which each unknown was localized.
    pub fn localization_rounds(&self, n_anchors: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; self.unknown_errors.len()];
        for log in &self.logs {
            for &v in &log.newly_localized {
                out[v - n_anchors - 1] = Some(log.round);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlpError {
    /// A round localized nobody while sensors remained; every later round would repeat it.
    #[error("protocol stalled in round {round} with {} sensors unlocalized", unlocalized.len())]
    Stalled {
        round: usize,
        unlocalized: Vec<usize>,
        run: Box<BlpRun>,
    },
    #[error("round limit {limit} reached with {} sensors unlocalized", unlocalized.len())]
    RoundLimit {
        limit: usize,
        unlocalized: Vec<usize>,
        run: Box<BlpRun>,
    },
}

impl BlpError {
    pub fn partial_run(&self) -> &BlpRun {
        match self {
            BlpError::Stalled { run, .. } | BlpError::RoundLimit { run, .. } => run,
        }
    }
}

/// Steps until every sensor is localized, a round makes no progress, or `max_rounds`
/// rounds (default: the number of unknowns) have run.
///
/// Each round delivers exact knowledge of which neighbors are localized, so a round
/// without progress leaves the world unchanged and the protocol can never resume.
pub fn run_blp(
    world: &mut BlpWorld,
    max_rounds: Option<usize>,
) -> std::result::Result<BlpRun, BlpError> {
    let limit = max_rounds.unwrap_or_else(|| world.n_unknowns());
    let mut logs = Vec::new();
    let snapshot = |w: &BlpWorld, logs: &Vec<RoundLog>, conv| BlpRun {
        logs: logs.clone(),
        positions: w.positions(),
        unknown_errors: w.unknown_errors(),
        convergence_round: conv,
    };
    if world.unlocalized().is_empty() {
        return Ok(snapshot(world, &logs, Some(0)));
    }
    while logs.len() < limit {
        let log = world.step_round();
        let stalled = log.newly_localized.is_empty();
        let round = log.round;
        logs.push(log);
        let left = world.unlocalized();
        if left.is_empty() {
            return Ok(snapshot(world, &logs, Some(round)));
        }
        if stalled {
            return Err(BlpError::Stalled {
                round,
                unlocalized: left,
                run: Box::new(snapshot(world, &logs, None)),
            });
        }
    }
    Err(BlpError::RoundLimit {
        limit,
        unlocalized: world.unlocalized(),
        run: Box::new(snapshot(world, &logs, None)),
    })
}

/// Outcome of [`check_blp_preconditions`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlpPreconditions {
    pub satisfied: bool,
    /// The failing condition, empty when satisfied.
    pub reason: String,
}

/// Checks that the sensing framework has a non-degenerate bilateration ordering and
/// that the subframework induced by the anchors has one too.
///
/// The conditions are read as: the anchor-induced subframework of the sensing graph
/// (not the grounded graph) must be bilaterable by itself.
pub fn check_blp_preconditions(net: &SensorNetwork) -> BlpPreconditions {
    let fail = |reason: &str| BlpPreconditions {
        satisfied: false,
        reason: reason.into(),
    };
    if find_nondegenerate_ordering(&net.framework, None).is_none() {
        return fail("sensing framework has no non-degenerate bilateration ordering");
    }
    let anchors: Vec<usize> = net.anchors().collect();
    if anchors.len() < 3 {
        return fail("fewer than three anchors");
    }
    let sub = Framework::new(
        net.graph().induced(&anchors),
        anchors.iter().map(|&v| net.pos(v)).collect(),
    );
    if !sub.is_ok_and(|sub| find_nondegenerate_ordering(&sub, None).is_some()) {
        return fail(
            "anchor subframework of the sensing graph has no non-degenerate bilateration ordering",
        );
    }
    BlpPreconditions {
        satisfied: true,
        reason: String::new(),
    }
}

/// Convenience: builds the world and runs the protocol.
pub fn simulate(
    net: &SensorNetwork,
    data: &AngleData,
    max_rounds: Option<usize>,
) -> Result<std::result::Result<BlpRun, BlpError>> {
    let mut world = BlpWorld::new(net, data)?;
    Ok(run_blp(&mut world, max_rounds))
}
