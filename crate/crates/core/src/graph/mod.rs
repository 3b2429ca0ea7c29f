//! Undirected unit-length multigraphs, demands, flows and hop-constrained
//! routing.
//!
//! Edges are stored as copies with stable ids (their insertion index), so a
//! cut can name exactly which parallel copies it removes. Parallel copies of
//! the same vertex pair form a bundle whose capacity is its multiplicity.

mod flow;
mod io;
pub mod lp;
mod routing;

pub use flow::{Demand, Flow, RoutingWitness};
pub use io::{parse_demand, parse_edge_list, write_edge_list};
pub use routing::{
    route_demand_exact, verify_routing, Infeasibility, MinCongestion, RoutingBackend,
    RoutingError, RoutingVerdict, DEFAULT_PATH_BUDGET,
};

use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Normalized undirected vertex pair `(min, max)`.
pub type Pair = (usize, usize);

#[inline]
pub fn pair(u: usize, v: usize) -> Pair {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<Pair>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.push(u, v);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for v in 1..n {
            g.push(v - 1, v);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.push(n - 1, 0);
        }
        g
    }

    /// The `d`-dimensional hypercube on `2^d` vertices.
    pub fn hypercube(d: u32) -> Self {
        let n = 1usize << d;
        let mut g = Self::new(n);
        for u in 0..n {
            for b in 0..d {
                let v = u ^ (1 << b);
                if u < v {
                    g.push(u, v);
                }
            }
        }
        g
    }

    /// Two cliques of size `k` joined by a single bridge `(k-1, k)`.
    pub fn barbell(k: usize) -> Self {
        let mut g = Self::new(2 * k);
        for side in [0, k] {
            for u in 0..k {
                for v in u + 1..k {
                    g.push(side + u, side + v);
                }
            }
        }
        g.push(k - 1, k);
        g
    }

    fn push(&mut self, u: usize, v: usize) -> usize {
        let id = self.edges.len();
        self.edges.push(pair(u, v));
        self.adj[u].push((v, id));
        self.adj[v].push((u, id));
        id
    }

    /// Adds one edge copy and returns its id.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<usize, GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(self.push(u, v))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Pair {
        self.edges[id]
    }

    /// `(neighbor, edge id)` for every incident edge copy.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    /// Distinct neighbors in increasing order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.adj[v].iter().map(|&(u, _)| u).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Degree counting parallel copies.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn volume(&self, set: &[usize]) -> usize {
        set.iter().map(|&v| self.degree(v)).sum()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        let p = pair(u, v);
        self.adj[u]
            .iter()
            .filter(|&&(w, id)| w == v && self.edges[id] == p)
            .count()
    }

    /// Multiplicity of every vertex pair that carries at least one copy.
    pub fn bundles(&self) -> BTreeMap<Pair, usize> {
        let mut out = BTreeMap::new();
        for &e in &self.edges {
            *out.entry(e).or_insert(0) += 1;
        }
        out
    }

    /// Number of edge copies with exactly one endpoint in `set`.
    pub fn boundary_size(&self, set: &[usize]) -> usize {
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[v] = true;
        }
        self.edges
            .iter()
            .filter(|&&(u, v)| inside[u] != inside[v])
            .count()
    }

    /// Appends every edge copy of `other` (same vertex set). Returns the ids
    /// assigned to the appended copies.
    pub fn union_with(&mut self, other: &MultiGraph) -> Vec<usize> {
        assert_eq!(self.n, other.n, "union of graphs on different vertex sets");
        other.edges.iter().map(|&(u, v)| self.push(u, v)).collect()
    }

    /// `G - C`: the graph without the given edge copies. Surviving copies keep
    /// their relative order; the returned vector maps new ids to old ids.
    pub fn without_edges(&self, removed: &[usize]) -> (MultiGraph, Vec<usize>) {
        let mut drop = vec![false; self.edges.len()];
        for &id in removed {
            drop[id] = true;
        }
        let mut g = MultiGraph::new(self.n);
        let mut origin = Vec::with_capacity(self.edges.len());
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if !drop[id] {
                g.push(u, v);
                origin.push(id);
            }
        }
        (g, origin)
    }

    /// Hop distances from `src`, `None` for unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        self.bfs_bounded(src, usize::MAX)
    }

    /// BFS that stops expanding beyond `radius`.
    pub fn bfs_bounded(&self, src: usize, radius: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            if du >= radius {
                continue;
            }
            for &(w, _) in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// `dist_G(u, v)`; `None` when no path exists.
    pub fn dist(&self, u: usize, v: usize) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        self.bfs(u)[v]
    }

    /// `ball_G(v, r)` in increasing vertex order.
    pub fn ball(&self, v: usize, r: usize) -> Vec<usize> {
        self.bfs_bounded(v, r)
            .iter()
            .enumerate()
            .filter_map(|(w, d)| d.map(|_| w))
            .collect()
    }

    /// Weak diameter of `set`, measured through the whole graph. `None` if
    /// some pair of `set` is disconnected. The empty set has diameter 0.
    pub fn diam(&self, set: &[usize]) -> Option<usize> {
        let mut best = 0;
        for &u in set {
            let d = self.bfs(u);
            for &v in set {
                best = best.max(d[v]?);
            }
        }
        Some(best)
    }

    pub fn diameter(&self) -> Option<usize> {
        let all: Vec<usize> = (0..self.n).collect();
        self.diam(&all)
    }

    /// All-pairs hop distances.
    pub fn distance_matrix(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n).map(|v| self.bfs(v)).collect()
    }
}
