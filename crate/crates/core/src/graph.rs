//! Undirected simple graphs over 1-based vertex ids and planar frameworks.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{angle_cosine, bearing, Point2};
use crate::scalar::Scalar;

/// Undirected simple graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<BTreeSet<usize>>,
}

/// An angle triple `(i, j, k)`: the angle at `i` between edges `(i, j)` and `(i, k)`, `j < k`.
pub type Triple = (usize, usize, usize);

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
            adj: vec![BTreeSet::new(); n + 1],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 1..=n {
            for j in i + 1..=n {
                g.add_edge(i, j).expect("valid ids");
            }
        }
        g
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for (idx, &(i, j)) in edges.iter().enumerate() {
            if !g.add_edge(i, j)? {
                return Err(Error::InvalidNetwork {
                    field: format!("edges[{idx}]"),
                    message: format!("duplicate edge ({i}, {j})"),
                });
            }
        }
        Ok(g)
    }

    /// Inserts `(i, j)`; returns `false` if it was already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<bool> {
        if i == j {
            return Err(Error::InvalidNetwork {
                field: "edges".into(),
                message: format!("self-loop at {i}"),
            });
        }
        for v in [i, j] {
            if v == 0 || v > self.n {
                return Err(Error::InvalidNetwork {
                    field: "edges".into(),
                    message: format!("vertex id {v} outside 1..={}", self.n),
                });
            }
        }
        let e = (i.min(j), i.max(j));
        if !self.edges.insert(e) {
            return Ok(false);
        }
        self.adj[i].insert(j);
        self.adj[j].insert(i);
        Ok(true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    /// Subgraph induced by `keep`, relabelled to `1..=keep.len()` in the given order.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut pos = vec![0usize; self.n + 1];
        for (k, &v) in keep.iter().enumerate() {
            pos[v] = k + 1;
        }
        let mut g = Graph::empty(keep.len());
        for (i, j) in self.edges() {
            if pos[i] > 0 && pos[j] > 0 {
                g.add_edge(pos[i], pos[j]).expect("relabelled ids valid");
            }
        }
        g
    }

    /// All 3-cliques `(a, b, c)` with `a < b < c`.
    pub fn triangles(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (a, b) in self.edges() {
            for &c in self.adj[b].range(b + 1..) {
                if self.adj[a].contains(&c) {
                    out.push((a, b, c));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// All angle triples `(i, j, k)` with `(i, j), (i, k)` edges and `j < k`, lexicographic.
pub fn angle_index_set(g: &Graph) -> Vec<Triple> {
    let mut out = Vec::new();
    for i in g.vertices() {
        let nb: Vec<usize> = g.neighbors(i).collect();
        for (a, &j) in nb.iter().enumerate() {
            for &k in &nb[a + 1..] {
                out.push((i, j, k));
            }
        }
    }
    out
}

/// `g` plus every edge between two anchors.
pub fn grounded_graph(g: &Graph, anchors: &[usize]) -> Graph {
    let mut out = g.clone();
    for (a, &i) in anchors.iter().enumerate() {
        for &j in &anchors[a + 1..] {
            out.add_edge(i, j).expect("anchor ids must be vertices");
        }
    }
    out
}

/// A graph together with a planar placement of its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework<T = f64> {
    pub graph: Graph,
    /// `config[v - 1]` is the position of vertex `v`.
    pub config: Vec<Point2<T>>,
}

impl<T: Scalar> Framework<T> {
    pub fn new(graph: Graph, config: Vec<Point2<T>>) -> Result<Self> {
        if config.len() != graph.n() {
            return Err(Error::DimensionMismatch {
                expected: graph.n(),
                found: config.len(),
            });
        }
        Ok(Self { graph, config })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn pos(&self, v: usize) -> Point2<T> {
        self.config[v - 1]
    }

    pub fn bearing(&self, i: usize, j: usize) -> Result<Point2<T>> {
        bearing(self.pos(i), self.pos(j)).map_err(|_| Error::CoincidentSensors(i, j))
    }

    pub fn angle(&self, (i, j, k): Triple) -> Result<T> {
        angle_cosine(self.pos(i), self.pos(j), self.pos(k)).map_err(|_| {
            if self.bearing(i, j).is_err() {
                Error::CoincidentSensors(i, j)
            } else {
                Error::CoincidentSensors(i, k)
            }
        })
    }
}
