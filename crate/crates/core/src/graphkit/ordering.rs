//! Bilateration orderings and the triangulation tests built on them.

use std::collections::BTreeSet;

use crate::geometry::{signed_area2, Point2};
use crate::graph::{Framework, Graph};

/// Threshold on `|cross|` of unit directions (and on twice the seed area).
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Slack keeping right angles out of the open interval `(0, 1)` for cosines.
pub const ACUTE_EPS: f64 = 1e-9;

/// A seed triangle followed by vertex additions, each attached to placed vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilaterationOrdering {
    pub seed: [usize; 3],
    /// `(vertex, attachments)`; attachments are the vertex's neighbors placed before it.
    pub additions: Vec<(usize, Vec<usize>)>,
}

impl BilaterationOrdering {
    /// Vertices in placement order.
    pub fn order(&self) -> Vec<usize> {
        self.seed
            .iter()
            .copied()
            .chain(self.additions.iter().map(|a| a.0))
            .collect()
    }

    /// Checks the combinatorial invariants against `g`.
    pub fn is_structurally_valid(&self, g: &Graph) -> bool {
        let [a, b, c] = self.seed;
        let in_range = |v: usize| v >= 1 && v <= g.n();
        if !(in_range(a) && in_range(b) && in_range(c)) || a == b || b == c || a == c {
            return false;
        }
        if !(g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c)) {
            return false;
        }
        let mut placed: BTreeSet<usize> = self.seed.iter().copied().collect();
        for (v, att) in &self.additions {
            if !in_range(*v) || placed.contains(v) || att.len() < 2 {
                return false;
            }
            let distinct: BTreeSet<usize> = att.iter().copied().collect();
            if distinct.len() != att.len()
                || !att.iter().all(|u| placed.contains(u) && g.has_edge(*u, *v))
            {
                return false;
            }
            placed.insert(*v);
        }
        placed.len() == g.n()
    }
}

/// Greedy closure from `seed`: repeatedly absorbs the lowest-id vertex that `accept`s
/// its placed neighbors. `accept` must be monotone in the placed set.
fn grow<F>(g: &Graph, seed: [usize; 3], accept: F) -> (Vec<(usize, Vec<usize>)>, BTreeSet<usize>)
where
    F: Fn(usize, &[usize]) -> bool,
{
    let n = g.n();
    let mut placed = vec![false; n + 1];
    let mut closure: BTreeSet<usize> = seed.iter().copied().collect();
    for &s in &seed {
        placed[s] = true;
    }
    let placed_nb = |placed: &[bool], v: usize| -> Vec<usize> {
        g.neighbors(v).filter(|&u| placed[u]).collect()
    };

    let mut ready = BTreeSet::new();
    for &s in &seed {
        for u in g.neighbors(s) {
            if !placed[u] && accept(u, &placed_nb(&placed, u)) {
                ready.insert(u);
            }
        }
    }
    let mut additions = Vec::new();
    while let Some(v) = ready.pop_first() {
        let att = placed_nb(&placed, v);
        placed[v] = true;
        closure.insert(v);
        additions.push((v, att));
        for u in g.neighbors(v) {
            if !placed[u] && !ready.contains(&u) && accept(u, &placed_nb(&placed, u)) {
                ready.insert(u);
            }
        }
    }
    (additions, closure)
}

/// Candidate seeds: the given one if it is a 3-clique, else all 3-cliques in order.
fn seeds(g: &Graph, required: Option<[usize; 3]>) -> Vec<[usize; 3]> {
    match required {
        Some(mut s) => {
            s.sort_unstable();
            let ok = s.iter().all(|&v| v >= 1 && v <= g.n())
                && g.has_edge(s[0], s[1])
                && g.has_edge(s[1], s[2])
                && g.has_edge(s[0], s[2]);
            if ok {
                vec![s]
            } else {
                Vec::new()
            }
        }
        None => g
            .triangles()
            .into_iter()
            .map(|(a, b, c)| [a, b, c])
            .collect(),
    }
}

fn search<F, S>(
    g: &Graph,
    required: Option<[usize; 3]>,
    seed_ok: S,
    accept: F,
) -> Option<BilaterationOrdering>
where
    F: Fn(usize, &[usize]) -> bool,
    S: Fn([usize; 3]) -> bool,
{
    if g.n() < 3 {
        return None;
    }
    // A seed inside a failed closure cannot reach further than that closure.
    let mut failed: Vec<BTreeSet<usize>> = Vec::new();
    for seed in seeds(g, required) {
        if !seed_ok(seed) || failed.iter().any(|c| seed.iter().all(|v| c.contains(v))) {
            continue;
        }
        let (additions, closure) = grow(g, seed, &accept);
        if closure.len() == g.n() {
            return Some(BilaterationOrdering { seed, additions });
        }
        failed.push(closure);
    }
    None
}

/// Finds a bilateration ordering of `g` (each addition has at least two placed neighbors).
pub fn find_bilateration_ordering(
    g: &Graph,
    required_seed: Option<[usize; 3]>,
) -> Option<BilaterationOrdering> {
    search(g, required_seed, |_| true, |_, att| att.len() >= 2)
}

fn directions_spread(p: &[Point2], v: usize, att: &[usize]) -> bool {
    let dirs: Vec<Point2> = att
        .iter()
        .filter_map(|&u| (p[u - 1] - p[v - 1]).normalized())
        .collect();
    if dirs.len() != att.len() {
        return false;
    }
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            if dirs[a].cross(dirs[b]).abs() > DEGENERACY_TOL {
                return true;
            }
        }
    }
    false
}

fn seed_nondegenerate(p: &[Point2], [a, b, c]: [usize; 3]) -> bool {
    signed_area2(p[a - 1], p[b - 1], p[c - 1]).abs() > DEGENERACY_TOL
}

/// Like [`find_bilateration_ordering`] but only admits additions whose attachment
/// directions are not all collinear, seeded from non-degenerate triangles.
pub fn find_nondegenerate_ordering(
    fw: &Framework,
    required_seed: Option<[usize; 3]>,
) -> Option<BilaterationOrdering> {
    let p = &fw.config;
    search(
        &fw.graph,
        required_seed,
        |s| seed_nondegenerate(p, s),
        |v, att| att.len() >= 2 && directions_spread(p, v, att),
    )
}

/// Checks that `ord` is structurally valid for `fw.graph` and geometrically non-degenerate.
pub fn verify_nondegenerate_ordering(fw: &Framework, ord: &BilaterationOrdering) -> bool {
    if !ord.is_structurally_valid(&fw.graph) || !seed_nondegenerate(&fw.config, ord.seed) {
        return false;
    }
    ord.additions
        .iter()
        .all(|(v, att)| directions_spread(&fw.config, *v, att))
}

/// A bilateration ordering in which every addition is attached to two adjacent placed vertices.
pub fn find_triangulated_ordering(g: &Graph) -> Option<BilaterationOrdering> {
    search(
        g,
        None,
        |_| true,
        |_, att| {
            att.iter()
                .enumerate()
                .any(|(a, &u)| att[a + 1..].iter().any(|&w| g.has_edge(u, w)))
        },
    )
}

/// Triangulated growth exists and every 3-clique has three cosines in `(eps, 1 - eps)`.
pub fn is_acute_triangulated(fw: &Framework) -> bool {
    if fw.n() < 3 || find_triangulated_ordering(&fw.graph).is_none() {
        return false;
    }
    let acute = |c: f64| c > ACUTE_EPS && c < 1.0 - ACUTE_EPS;
    fw.graph.triangles().into_iter().all(|(a, b, c)| {
        [(a, b, c), (b, a, c), (c, a, b)]
            .into_iter()
            .all(|t| fw.angle(t).map(acute).unwrap_or(false))
    })
}
