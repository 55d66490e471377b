//! Maximal clique enumeration and chordality.

use std::collections::BTreeSet;

use crate::graph::Graph;

/// Maximal cliques, each sorted, the list sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliqueSet {
    pub cliques: Vec<Vec<usize>>,
}

impl CliqueSet {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cliques.iter()
    }
}

/// Bron-Kerbosch with Tomita pivoting. Isolated vertices form singleton cliques.
pub fn maximal_cliques(g: &Graph) -> CliqueSet {
    let nb: Vec<BTreeSet<usize>> = (0..=g.n())
        .map(|v| {
            if v == 0 {
                BTreeSet::new()
            } else {
                g.neighbors(v).collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut r = Vec::new();
    let p: BTreeSet<usize> = g.vertices().collect();
    expand(&nb, &mut r, p, BTreeSet::new(), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    CliqueSet { cliques: out }
}

fn expand(
    nb: &[BTreeSet<usize>],
    r: &mut Vec<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| (p.intersection(&nb[u]).count(), std::cmp::Reverse(u)))
        .expect("p non-empty");
    let candidates: Vec<usize> = p.difference(&nb[pivot]).copied().collect();
    for v in candidates {
        r.push(v);
        let p2 = p.intersection(&nb[v]).copied().collect();
        let x2 = x.intersection(&nb[v]).copied().collect();
        expand(nb, r, p2, x2, out);
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}

/// Lexicographic breadth-first search order (first visited first).
pub fn lex_bfs(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut visited = vec![false; n + 1];
    let mut order = Vec::with_capacity(n);
    for step in 0..n {
        let v = (1..=n)
            .filter(|&v| !visited[v])
            // lexicographically largest label; ties to the lowest id
            .max_by(|&a, &b| labels[a].cmp(&labels[b]).then(b.cmp(&a)))
            .expect("unvisited vertex remains");
        visited[v] = true;
        order.push(v);
        for u in g.neighbors(v) {
            if !visited[u] {
                labels[u].push(n - step);
            }
        }
    }
    order
}

/// Returns a perfect elimination ordering when `g` is chordal.
pub fn perfect_elimination_ordering(g: &Graph) -> Option<Vec<usize>> {
    let mut peo = lex_bfs(g);
    peo.reverse();
    let mut pos = vec![0usize; g.n() + 1];
    for (k, &v) in peo.iter().enumerate() {
        pos[v] = k;
    }
    for &v in &peo {
        let later: Vec<usize> = g.neighbors(v).filter(|&u| pos[u] > pos[v]).collect();
        if let Some(&parent) = later.iter().min_by_key(|&&u| pos[u]) {
            if !later.iter().all(|&u| u == parent || g.has_edge(u, parent)) {
                return None;
            }
        }
    }
    Some(peo)
}

pub fn is_chordal(g: &Graph) -> bool {
    perfect_elimination_ordering(g).is_some()
}

/// Chordal supergraph from minimum-degree elimination: eliminating a vertex joins its
/// remaining neighbors. Ties go to the lowest id. Chordal inputs come back unchanged.
pub fn chordal_extension(g: &Graph) -> Graph {
    if is_chordal(g) {
        return g.clone();
    }
    min_degree_elimination(g).1
}

/// Minimum-degree elimination order (ties to the lowest id) and the graph with its fill edges.
pub fn min_degree_elimination(g: &Graph) -> (Vec<usize>, Graph) {
    let n = g.n();
    let mut out = g.clone();
    let mut adj: Vec<std::collections::BTreeSet<usize>> = (0..=n)
        .map(|v| {
            if v == 0 {
                Default::default()
            } else {
                g.neighbors(v).collect()
            }
        })
        .collect();
    let mut alive = vec![true; n + 1];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (1..=n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .expect("vertex remains");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                if adj[x].insert(y) {
                    adj[y].insert(x);
                    out.add_edge(x, y).expect("valid fill edge");
                }
            }
        }
        for &x in &nb {
            adj[x].remove(&v);
        }
        alive[v] = false;
        order.push(v);
    }
    (order, out)
}
