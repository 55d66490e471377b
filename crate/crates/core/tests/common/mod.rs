//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use anglenet::{Framework, Graph, Point2};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rss(a: &[Point2], b: &[Point2]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn max_dev(a: &[Point2], b: &[Point2]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm())
        .fold(0.0, f64::max)
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 0 {
        0.5 * (s[m - 1] + s[m])
    } else {
        s[m]
    }
}

/// Cosine of the angle at `pi` between `pj` and `pk`, straight from coordinates.
pub fn cosine(pi: [f64; 2], pj: [f64; 2], pk: [f64; 2]) -> f64 {
    let (ax, ay) = (pj[0] - pi[0], pj[1] - pi[1]);
    let (bx, by) = (pk[0] - pi[0], pk[1] - pi[1]);
    (ax * bx + ay * by) / ((ax * ax + ay * ay).sqrt() * (bx * bx + by * by).sqrt())
}

fn cosines(graph: &Graph, pts: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..=graph.n() {
        let nb: Vec<usize> = (1..=graph.n()).filter(|&j| graph.has_edge(i, j)).collect();
        for a in 0..nb.len() {
            for &k in &nb[a + 1..] {
                out.push(cosine(pts[i - 1], pts[nb[a] - 1], pts[k - 1]));
            }
        }
    }
    out
}

/// Central-difference Jacobian of all neighbor-pair cosines, columns `(x_1, y_1, ...)`.
pub fn fd_jacobian(fw: &Framework) -> DMatrix<f64> {
    let base: Vec<[f64; 2]> = fw.config.iter().map(|p| [p.x, p.y]).collect();
    let rows = cosines(&fw.graph, &base).len();
    let h = 1e-6;
    let mut jac = DMatrix::zeros(rows, 2 * base.len());
    for c in 0..2 * base.len() {
        let (mut up, mut dn) = (base.clone(), base.clone());
        up[c / 2][c % 2] += h;
        dn[c / 2][c % 2] -= h;
        let (fu, fd) = (cosines(&fw.graph, &up), cosines(&fw.graph, &dn));
        for r in 0..rows {
            jac[(r, c)] = (fu[r] - fd[r]) / (2.0 * h);
        }
    }
    jac
}

/// Grows a framework one vertex at a time, each new vertex joined to two placed vertices
/// that are not collinear with it (plus an occasional third edge).
pub fn grow_framework(n: usize, seed: u64) -> Framework {
    let mut r = rng(seed);
    let area = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
    };
    let mut pts: Vec<[f64; 2]> = Vec::new();
    loop {
        let t: Vec<[f64; 2]> = (0..3)
            .map(|_| [r.random::<f64>(), r.random::<f64>()])
            .collect();
        if area(t[0], t[1], t[2]) > 0.05 {
            pts.extend(t);
            break;
        }
    }
    let mut edges = vec![(1, 2), (1, 3), (2, 3)];
    while pts.len() < n {
        let p = [r.random::<f64>(), r.random::<f64>()];
        let a = r.random_range(0..pts.len());
        let b = r.random_range(0..pts.len());
        if a == b || area(p, pts[a], pts[b]) < 0.02 {
            continue;
        }
        let v = pts.len() + 1;
        edges.push((a + 1, v));
        edges.push((b + 1, v));
        if r.random::<f64>() < 0.3 {
            let c = r.random_range(0..pts.len());
            if c != a && c != b {
                edges.push((c + 1, v));
            }
        }
        pts.push(p);
    }
    let g = Graph::from_edges(n, &edges).unwrap();
    Framework::new(g, pts.iter().map(|p| Point2::new(p[0], p[1])).collect()).unwrap()
}

/// Multi-start Levenberg-Marquardt fit of unknown positions to measured cosines.
///
/// `triples` index positions 1-based; sensors `1..=n_a` are fixed at `anchors`.
pub struct LsqOracle<'a> {
    pub anchors: &'a [Point2],
    pub triples: &'a [(usize, usize, usize)],
    pub values: &'a [f64],
    pub n_unknowns: usize,
}

impl LsqOracle<'_> {
    fn residuals(&self, z: &DVector<f64>) -> DVector<f64> {
        let n_a = self.anchors.len();
        let pos = |v: usize| {
            if v <= n_a {
                [self.anchors[v - 1].x, self.anchors[v - 1].y]
            } else {
                [z[2 * (v - n_a - 1)], z[2 * (v - n_a - 1) + 1]]
            }
        };
        DVector::from_iterator(
            self.triples.len(),
            self.triples
                .iter()
                .zip(self.values)
                .map(|(&(i, j, k), a)| cosine(pos(i), pos(j), pos(k)) - a),
        )
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let h = 1e-7;
        let mut jac = DMatrix::zeros(self.triples.len(), z.len());
        for c in 0..z.len() {
            let (mut up, mut dn) = (z.clone(), z.clone());
            up[c] += h;
            dn[c] -= h;
            jac.set_column(
                c,
                &((self.residuals(&up) - self.residuals(&dn)) / (2.0 * h)),
            );
        }
        jac
    }

    fn descend(&self, mut z: DVector<f64>) -> (DVector<f64>, f64) {
        let mut cost = self.residuals(&z).norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..300 {
            if !cost.is_finite() || cost < 1e-26 {
                break;
            }
            let r = self.residuals(&z);
            let j = self.jacobian(&z);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * r;
            let mut improved = false;
            for _ in 0..20 {
                let mut a = jtj.clone();
                for d in 0..a.nrows() {
                    a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
                }
                let Some(step) = a.lu().solve(&(-&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let cand = &z + step;
                let c = self.residuals(&cand).norm_squared();
                if c.is_finite() && c < cost {
                    z = cand;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-15);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (z, cost)
    }

    /// Best positions over `starts` random initializations in `[-0.5, 1.5]^2`, with the cost.
    pub fn solve(&self, starts: usize, seed: u64) -> (Vec<Point2>, f64) {
        let mut r = rng(seed);
        let mut best: Option<(DVector<f64>, f64)> = None;
        for _ in 0..starts {
            let z0 = DVector::from_fn(2 * self.n_unknowns, |_, _| r.random_range(-0.5..1.5));
            let (z, c) = self.descend(z0);
            if best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((z, c));
            }
        }
        let (z, c) = best.expect("at least one start");
        (
            (0..self.n_unknowns)
                .map(|u| Point2::new(z[2 * u], z[2 * u + 1]))
                .collect(),
            c,
        )
    }
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Maximal cliques by subset enumeration; `adj` is 0-based, fine for `n <= 12`.
pub fn brute_force_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let is_clique = |mask: u32| {
        (0..n)
            .all(|i| mask & (1 << i) == 0 || (i + 1..n).all(|j| mask & (1 << j) == 0 || adj[i][j]))
    };
    let cliques: Vec<u32> = (1u32..1 << n).filter(|&m| is_clique(m)).collect();
    let mut out: Vec<Vec<usize>> = cliques
        .iter()
        .filter(|&&m| !cliques.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    out.sort();
    out
}

/// Fills the unspecified entries of a partial matrix with a chordal pattern, processing
/// vertices in `order` (a perfect elimination ordering reversed: each vertex's earlier
/// pattern neighbors form a clique). With PSD clique blocks the result is PSD.
pub fn complete_chordal(x: &DMatrix<f64>, adj: &[Vec<bool>], order: &[usize]) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = x.clone();
    let mut done: Vec<usize> = Vec::new();
    for &v in order {
        let c: Vec<usize> = done.iter().copied().filter(|&u| adj[v][u]).collect();
        let others: Vec<usize> = done.iter().copied().filter(|&u| !adj[v][u]).collect();
        if !others.is_empty() && !c.is_empty() {
            let xcc = DMatrix::from_fn(c.len(), c.len(), |a, b| out[(c[a], c[b])]);
            let pinv = xcc.pseudo_inverse(1e-12).expect("pseudo-inverse");
            let xvc = DMatrix::from_fn(1, c.len(), |_, b| out[(v, c[b])]);
            let xco = DMatrix::from_fn(c.len(), others.len(), |a, b| out[(c[a], others[b])]);
            let fill = xvc * pinv * xco;
            for (b, &o) in others.iter().enumerate() {
                out[(v, o)] = fill[(0, b)];
                out[(o, v)] = fill[(0, b)];
            }
        } else {
            for &o in &others {
                out[(v, o)] = 0.0;
                out[(o, v)] = 0.0;
            }
        }
        done.push(v);
    }
    debug_assert_eq!(done.len(), n);
    out
}
