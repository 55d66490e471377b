//! Sensor networks, angle measurements and the network file format.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_area2, Frame, Point2};
use crate::graph::{angle_index_set, grounded_graph, Framework, Graph, Triple};

/// Maximum tolerated `|R^T R - I|` entry of a local frame.
pub const FRAME_ORTHOGONALITY_TOL: f64 = 1e-12;

/// Twice-area threshold below which anchor triples count as collinear.
pub const COLLINEAR_AREA_TOL: f64 = 1e-10;

/// Deterministic generator used for every stochastic operation.
pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A planar network: anchors are vertices `1..=n_anchors`, unknowns the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorNetwork {
    pub framework: Framework,
    n_anchors: usize,
    grounded: Graph,
    frames: Vec<Frame>,
}

impl SensorNetwork {
    /// Builds a network with identity local frames.
    pub fn new(framework: Framework, n_anchors: usize) -> Result<Self> {
        let n = framework.n();
        Self::with_frames(framework, n_anchors, vec![Frame::identity(); n])
    }

    pub fn with_frames(framework: Framework, n_anchors: usize, frames: Vec<Frame>) -> Result<Self> {
        let n = framework.n();
        if n_anchors > n {
            return Err(Error::InvalidNetwork {
                field: "anchors".into(),
                message: format!("{n_anchors} anchors but only {n} vertices"),
            });
        }
        if frames.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: frames.len(),
            });
        }
        for (k, f) in frames.iter().enumerate() {
            if !(f.orthogonality_defect() <= FRAME_ORTHOGONALITY_TOL) {
                return Err(Error::InvalidNetwork {
                    field: format!("frames[{}]", k + 1),
                    message: "matrix is not orthogonal".into(),
                });
            }
        }
        for (k, p) in framework.config.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidNetwork {
                    field: format!("pos[{}]", k + 1),
                    message: "non-finite coordinate".into(),
                });
            }
        }
        let anchors: Vec<usize> = (1..=n_anchors).collect();
        let grounded = grounded_graph(&framework.graph, &anchors);
        Ok(Self {
            framework,
            n_anchors,
            grounded,
            frames,
        })
    }

    /// Replaces every local frame with one drawn uniformly from O(2).
    pub fn randomize_frames(mut self, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        for f in &mut self.frames {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            *f = Frame::from_angle(theta, rng.random_bool(0.5));
        }
        self
    }

    pub fn n(&self) -> usize {
        self.framework.n()
    }

    pub fn n_anchors(&self) -> usize {
        self.n_anchors
    }

    pub fn n_unknowns(&self) -> usize {
        self.n() - self.n_anchors
    }

    pub fn anchors(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_anchors
    }

    pub fn unknowns(&self) -> std::ops::RangeInclusive<usize> {
        self.n_anchors + 1..=self.n()
    }

    pub fn is_anchor(&self, v: usize) -> bool {
        v <= self.n_anchors
    }

    /// Sensing graph `G`.
    pub fn graph(&self) -> &Graph {
        &self.framework.graph
    }

    /// Grounded graph: sensing graph plus all anchor-anchor edges.
    pub fn grounded(&self) -> &Graph {
        &self.grounded
    }

    pub fn grounded_framework(&self) -> Framework {
        Framework {
            graph: self.grounded.clone(),
            config: self.framework.config.clone(),
        }
    }

    pub fn frame(&self, v: usize) -> &Frame {
        &self.frames[v - 1]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn pos(&self, v: usize) -> Point2 {
        self.framework.pos(v)
    }

    /// True positions of the unknown sensors, in id order.
    pub fn unknown_positions(&self) -> Vec<Point2> {
        self.unknowns().map(|v| self.pos(v)).collect()
    }

    /// `true` if every anchor triple has (twice) area below [`COLLINEAR_AREA_TOL`].
    pub fn anchors_collinear(&self) -> bool {
        let a: Vec<Point2> = self.anchors().map(|v| self.pos(v)).collect();
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                for k in j + 1..a.len() {
                    if signed_area2(a[i], a[j], a[k]).abs() > COLLINEAR_AREA_TOL {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `R_i (x_i - x_j) / |x_i - x_j|`: the bearing of edge `(i, j)` as sensed by `i`.
    pub fn local_bearing(&self, i: usize, j: usize) -> Result<LocalBearing> {
        let g = self.framework.bearing(i, j)?;
        Ok(LocalBearing {
            observer: i,
            target: j,
            direction: self.frame(i).rotate(g),
        })
    }

    /// Edge index `l_ij` (1-based) over the grounded edges in lexicographic order.
    pub fn edge_index(&self) -> BTreeMap<(usize, usize), usize> {
        self.grounded
            .edges()
            .enumerate()
            .map(|(l, e)| (e, l + 1))
            .collect()
    }
}

/// A bearing expressed in the observer's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBearing {
    pub observer: usize,
    pub target: usize,
    pub direction: Point2,
}

/// Measurement regime used when synthesizing angle data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Regime {
    Exact,
    /// Additive `N(0, sigma^2)` noise on every angle cosine.
    Gaussian {
        sigma: f64,
    },
    /// Every local bearing is displaced by a vector of norm at most `tau_max`.
    Bounded {
        tau_max: f64,
    },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Exact => "exact",
            Regime::Gaussian { .. } => "gaussian",
            Regime::Bounded { .. } => "bounded",
        }
    }
}

/// Half-width of the interval that contains the true cosine when both bearings
/// of an angle are displaced by at most `tau_max`.
pub fn disturbance_half_width(tau_max: f64) -> f64 {
    2.0 * tau_max + tau_max * tau_max
}

/// Per-triple annotation of the measurement regime.
#[derive(Debug, Clone, PartialEq)]
pub enum Annotation {
    Exact,
    Gaussian { sigma: Vec<f64> },
    Bounded { lower: Vec<f64>, upper: Vec<f64> },
}

/// Angle cosines over the grounded graph's angle index set.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleData {
    pub triples: Vec<Triple>,
    pub values: Vec<f64>,
    /// `l_ij` for every grounded edge `(i, j)`, `i < j`.
    pub edge_index: BTreeMap<(usize, usize), usize>,
    pub annotation: Annotation,
    /// Measured bearing vectors keyed by `(observer, target)`, in the observer's frame.
    /// Under the bounded and gaussian regimes these are the perturbed vectors.
    pub local_bearings: BTreeMap<(usize, usize), Point2>,
}

impl AngleData {
    pub fn m(&self) -> usize {
        self.edge_index.len()
    }

    pub fn edge(&self, i: usize, j: usize) -> usize {
        self.edge_index[&(i.min(j), i.max(j))]
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.annotation, Annotation::Exact)
    }

    pub fn regime_name(&self) -> &'static str {
        match self.annotation {
            Annotation::Exact => "exact",
            Annotation::Gaussian { .. } => "gaussian",
            Annotation::Bounded { .. } => "bounded",
        }
    }
}

fn sample_disk(rng: &mut Rng64, radius: f64) -> Point2 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Point2::new(r * t.cos(), r * t.sin())
}

/// Synthesizes angle measurements for `net` under `regime`.
///
/// Exact values come from the true positions. Gaussian values add independent
/// `N(0, sigma^2)` draws to each cosine; the stored local bearings get isotropic
/// noise of the same scale for the distributed protocol. Bounded values are
/// recomputed from local bearings displaced uniformly inside a disk of radius
/// `tau_max` and carry the interval `[a - h, a + h]`, `h = 2 tau_max + tau_max^2`.
pub fn synthesize_measurements(
    net: &SensorNetwork,
    regime: Regime,
    seed: u64,
) -> Result<AngleData> {
    let g = net.grounded();
    let triples = angle_index_set(g);
    let mut rng = rng_from_seed(seed);

    let mut local_bearings = BTreeMap::new();
    for (i, j) in g.edges() {
        for (a, b) in [(i, j), (j, i)] {
            let mut d = net.local_bearing(a, b)?.direction;
            match regime {
                Regime::Exact => {}
                Regime::Gaussian { sigma } => {
                    let nd = Normal::new(0.0, sigma)
                        .map_err(|e| Error::PreconditionViolated(e.to_string()))?;
                    d = d + Point2::new(nd.sample(&mut rng), nd.sample(&mut rng));
                }
                Regime::Bounded { tau_max } => d = d + sample_disk(&mut rng, tau_max),
            }
            local_bearings.insert((a, b), d);
        }
    }

    let truth = triples
        .iter()
        .map(|&t| net.framework.angle(t))
        .collect::<Result<Vec<f64>>>()?;

    let (values, annotation) = match regime {
        Regime::Exact => (truth, Annotation::Exact),
        Regime::Gaussian { sigma } => {
            if !(sigma > 0.0) {
                return Err(Error::PreconditionViolated("sigma must be positive".into()));
            }
            let nd =
                Normal::new(0.0, sigma).map_err(|e| Error::PreconditionViolated(e.to_string()))?;
            let v: Vec<f64> = truth.iter().map(|a| a + nd.sample(&mut rng)).collect();
            let s = vec![sigma; v.len()];
            (v, Annotation::Gaussian { sigma: s })
        }
        Regime::Bounded { tau_max } => {
            let h = disturbance_half_width(tau_max);
            let v: Vec<f64> = triples
                .iter()
                .map(|&(i, j, k)| local_bearings[&(i, j)].dot(local_bearings[&(i, k)]))
                .collect();
            let lower = v.iter().map(|a| a - h).collect();
            let upper = v.iter().map(|a| a + h).collect();
            (v, Annotation::Bounded { lower, upper })
        }
    };

    Ok(AngleData {
        triples,
        values,
        edge_index: net.edge_index(),
        annotation,
        local_bearings,
    })
}

// ---------------------------------------------------------------------------
// Network file format

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    pub pos: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub id: usize,
    /// Row-major 2x2 orthogonal matrix.
    pub matrix: [f64; 4],
}

/// On-disk JSON representation of a [`SensorNetwork`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub dim: usize,
    pub anchors: Vec<NodeRecord>,
    pub unknowns: Vec<NodeRecord>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<FrameRecord>>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidNetwork {
        field: field.into(),
        message: message.into(),
    }
}

impl NetworkFile {
    pub fn from_network(net: &SensorNetwork, include_frames: bool) -> Self {
        let rec = |v: usize| {
            let p = net.pos(v);
            NodeRecord {
                id: v,
                pos: [p.x, p.y],
            }
        };
        Self {
            dim: 2,
            anchors: net.anchors().map(rec).collect(),
            unknowns: net.unknowns().map(rec).collect(),
            edges: net.graph().edges().map(|(i, j)| [i, j]).collect(),
            frames: include_frames.then(|| {
                (1..=net.n())
                    .map(|v| FrameRecord {
                        id: v,
                        matrix: net.frame(v).row_major(),
                    })
                    .collect()
            }),
        }
    }

    pub fn into_network(self) -> Result<SensorNetwork> {
        if self.dim != 2 {
            return Err(invalid("dim", format!("expected 2, found {}", self.dim)));
        }
        let n_a = self.anchors.len();
        let n = n_a + self.unknowns.len();
        let mut config = Vec::with_capacity(n);
        for (field, list, first) in [
            ("anchors", &self.anchors, 1),
            ("unknowns", &self.unknowns, n_a + 1),
        ] {
            for (k, rec) in list.iter().enumerate() {
                if rec.id != first + k {
                    return Err(invalid(
                        format!("{field}[{k}].id"),
                        format!(
                            "expected id {} (ids must be 1..n with anchors first)",
                            first + k
                        ),
                    ));
                }
                if !(rec.pos[0].is_finite() && rec.pos[1].is_finite()) {
                    return Err(invalid(
                        format!("{field}[{k}].pos"),
                        "non-finite coordinate",
                    ));
                }
                config.push(Point2::new(rec.pos[0], rec.pos[1]));
            }
        }
        let mut graph = Graph::empty(n);
        for (k, e) in self.edges.iter().enumerate() {
            let field = format!("edges[{k}]");
            match graph.add_edge(e[0], e[1]) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(invalid(
                        field,
                        format!("duplicate edge ({}, {})", e[0], e[1]),
                    ))
                }
                Err(Error::InvalidNetwork { message, .. }) => return Err(invalid(field, message)),
                Err(other) => return Err(other),
            }
        }
        for (i, j) in graph.edges() {
            if (config[i - 1] - config[j - 1]).norm() < crate::geometry::COINCIDENCE_TOL {
                return Err(invalid("edges", format!("sensors {i} and {j} coincide")));
            }
        }
        let mut frames = vec![Frame::identity(); n];
        if let Some(list) = self.frames {
            for (k, f) in list.iter().enumerate() {
                if f.id == 0 || f.id > n {
                    return Err(invalid(
                        format!("frames[{k}].id"),
                        format!("id {} outside 1..={n}", f.id),
                    ));
                }
                let frame = Frame::from_row_major(f.matrix);
                if !(frame.orthogonality_defect() <= FRAME_ORTHOGONALITY_TOL) {
                    return Err(invalid(
                        format!("frames[{k}].matrix"),
                        "matrix is not orthogonal within 1e-12",
                    ));
                }
                frames[f.id - 1] = frame;
            }
        }
        SensorNetwork::with_frames(Framework::new(graph, config)?, n_a, frames)
    }

    /// Parses JSON text; syntax errors report line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            invalid(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network file serializes")
    }
}

pub fn load_network(path: impl AsRef<Path>) -> Result<SensorNetwork> {
    let text = std::fs::read_to_string(path)?;
    NetworkFile::parse(&text)?.into_network()
}

pub fn save_network(
    net: &SensorNetwork,
    path: impl AsRef<Path>,
    include_frames: bool,
) -> Result<()> {
    std::fs::write(
        path,
        NetworkFile::from_network(net, include_frames).to_json() + "\n",
    )?;
    Ok(())
}
