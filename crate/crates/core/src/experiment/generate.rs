//! Random network generators in the unit box.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::network::{rng_from_seed, Rng64, SensorNetwork};
use crate::{Error, Framework, Graph, Result};

/// Placement attempts per vertex before generation gives up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
/// Smallest interior angle (degrees) accepted in any new triangle.
pub const MIN_ANGLE_DEG: f64 = 15.0;
/// Largest interior angle (degrees) accepted in a triangle of the acute generator.
pub const MAX_ACUTE_ANGLE_DEG: f64 = 85.0;
/// Smallest distance between a new vertex and any placed one.
pub const MIN_SEPARATION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    /// Every vertex attaches to both ends of an existing edge forming an acute triangle.
    AcuteTriangulated,
    /// Every vertex attaches to two placed vertices, not necessarily adjacent.
    Bilateration,
}

impl NetworkKind {
    pub fn name(&self) -> &'static str {
        match self {
            NetworkKind::AcuteTriangulated => "acute_triangulated",
            NetworkKind::Bilateration => "bilateration",
        }
    }
}

impl std::str::FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acute_triangulated" | "acute" => Ok(NetworkKind::AcuteTriangulated),
            "bilateration" => Ok(NetworkKind::Bilateration),
            other => Err(Error::PreconditionViolated(format!(
                "unknown network kind `{other}`"
            ))),
        }
    }
}

/// Interior angles (degrees) of triangle `abc`.
fn interior_angles(a: Point2, b: Point2, c: Point2) -> [f64; 3] {
    let ang = |p: Point2, q: Point2, r: Point2| {
        let (u, v) = (q - p, r - p);
        u.cross(v).abs().atan2(u.dot(v)).to_degrees()
    };
    [ang(a, b, c), ang(b, a, c), ang(c, a, b)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Rejection {
    TooClose,
    SharpAngle,
    ObtuseAngle,
}

impl Rejection {
    fn describe(&self) -> &'static str {
        match self {
            Rejection::TooClose => "minimum separation",
            Rejection::SharpAngle => "minimum interior angle",
            Rejection::ObtuseAngle => "acute triangle",
        }
    }
}

fn check_triangle(a: Point2, b: Point2, c: Point2, acute: bool) -> Option<Rejection> {
    let angles = interior_angles(a, b, c);
    if angles.iter().any(|&t| t < MIN_ANGLE_DEG) {
        return Some(Rejection::SharpAngle);
    }
    if acute && angles.iter().any(|&t| t > MAX_ACUTE_ANGLE_DEG) {
        return Some(Rejection::ObtuseAngle);
    }
    None
}

fn sample_box(rng: &mut Rng64) -> Point2 {
    Point2::new(rng.random::<f64>(), rng.random::<f64>())
}

struct Growth {
    pos: Vec<Point2>,
    edges: Vec<(usize, usize)>,
    rejections: BTreeMap<Rejection, usize>,
}

impl Growth {
    fn too_close(&self, p: Point2) -> bool {
        self.pos.iter().any(|&q| (p - q).norm() < MIN_SEPARATION)
    }

    fn fail(&self, vertex: usize) -> Error {
        let worst = self
            .rejections
            .iter()
            .max_by_key(|(_, c)| **c)
            .map(|(r, c)| (r.describe(), *c));
        let detail = worst.map_or(String::new(), |(r, c)| {
            format!("; most frequent rejection: {r} ({c} times)")
        });
        Error::GenerationFailed(format!(
            "no valid placement for vertex {vertex} after {MAX_PLACEMENT_ATTEMPTS} attempts{detail}"
        ))
    }

    /// Places a vertex attached to a pair chosen by `pick`, with `acute` controlling the triangle test.
    fn place<F>(&mut self, rng: &mut Rng64, acute: bool, mut pick: F) -> Result<()>
    where
        F: FnMut(&mut Rng64, &Self) -> (usize, usize),
    {
        let v = self.pos.len() + 1;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let (a, b) = pick(rng, self);
            let p = sample_box(rng);
            if self.too_close(p) {
                *self.rejections.entry(Rejection::TooClose).or_default() += 1;
                continue;
            }
            if let Some(r) = check_triangle(self.pos[a - 1], self.pos[b - 1], p, acute) {
                *self.rejections.entry(r).or_default() += 1;
                continue;
            }
            self.pos.push(p);
            self.edges.push((a, v));
            self.edges.push((b, v));
            return Ok(());
        }
        Err(self.fail(v))
    }

    fn seed_triangle(&mut self, rng: &mut Rng64, acute: bool) -> Result<()> {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let (a, b, c) = (sample_box(rng), sample_box(rng), sample_box(rng));
            let sep = (a - b).norm().min((a - c).norm()).min((b - c).norm());
            if sep < MIN_SEPARATION {
                *self.rejections.entry(Rejection::TooClose).or_default() += 1;
                continue;
            }
            if let Some(r) = check_triangle(a, b, c, acute) {
                *self.rejections.entry(r).or_default() += 1;
                continue;
            }
            self.pos.extend([a, b, c]);
            self.edges.extend([(1, 2), (1, 3), (2, 3)]);
            return Ok(());
        }
        Err(self.fail(1))
    }
}

/// Generates a network of `n` vertices whose first `n_a` are anchors, with uniformly
/// random local frames. Deterministic per `seed`.
///
/// The acute generator needs `n_a = 3`: the grounded graph joins all anchors, and no
/// four points in the plane span only acute triangles.
pub fn generate_network(
    kind: NetworkKind,
    n: usize,
    n_a: usize,
    seed: u64,
) -> Result<SensorNetwork> {
    if n_a < 3 || n < n_a {
        return Err(Error::PreconditionViolated(format!(
            "need n >= n_a >= 3, got n = {n}, n_a = {n_a}"
        )));
    }
    if kind == NetworkKind::AcuteTriangulated && n_a != 3 {
        return Err(Error::PreconditionViolated(format!(
            "acute-triangulated networks need exactly 3 anchors, got {n_a}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let acute = kind == NetworkKind::AcuteTriangulated;
    let mut g = Growth {
        pos: Vec::with_capacity(n),
        edges: Vec::new(),
        rejections: BTreeMap::new(),
    };
    g.seed_triangle(&mut rng, acute)?;
    while g.pos.len() < n {
        let placed = g.pos.len();
        match kind {
            NetworkKind::AcuteTriangulated => g.place(&mut rng, true, |rng, s| {
                s.edges[rng.random_range(0..s.edges.len())]
            })?,
            NetworkKind::Bilateration => {
                // anchors are placed first, so their induced subframework is grown the same way
                let pool = placed;
                g.place(&mut rng, false, |rng, _| {
                    let a = rng.random_range(1..=pool);
                    let mut b = rng.random_range(1..pool);
                    if b >= a {
                        b += 1;
                    }
                    (a.min(b), a.max(b))
                })?
            }
        }
    }
    let graph = Graph::from_edges(n, &g.edges)?;
    let fw = Framework::new(graph, g.pos)?;
    let frame_seed = seed ^ 0x9E37_79B9_7F4A_7C15;
    Ok(SensorNetwork::new(fw, n_a)?.randomize_frames(frame_seed))
}
