//! Well-separated clusterings and their decomposition into groups of
//! equal-size, well-separated blocks.

use crate::graph::MultiGraph;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusteringError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("cover needs more than {load_max} clusterings ({covered} of {n} vertices covered)")]
    CoverInfeasible {
        load_max: usize,
        covered: usize,
        n: usize,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Disjoint clusters of bounded weak diameter and pairwise separation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub diameter_bound: usize,
    pub separation_bound: usize,
}

impl Clustering {
    /// Number of vertices across all clusters.
    pub fn size(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellSeparatedClustering {
    pub n: usize,
    pub clusterings: Vec<Clustering>,
    pub load: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargestCluster {
    pub clustering: usize,
    pub cluster: usize,
    pub vertices: Vec<usize>,
}

impl LargestCluster {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// Multi-source BFS distance from `set` to every vertex.
fn distances_from_set(g: &MultiGraph, set: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for &v in set {
        if dist[v].is_none() {
            dist[v] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &(w, _) in g.incident(u) {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Checks that the sets are pairwise at distance at least `sep`.
fn check_separation(g: &MultiGraph, sets: &[Vec<usize>], sep: usize) -> Result<(), String> {
    for (i, a) in sets.iter().enumerate() {
        let dist = distances_from_set(g, a);
        for (j, b) in sets.iter().enumerate().skip(i + 1) {
            for &v in b {
                if let Some(d) = dist[v] {
                    if d < sep {
                        return Err(format!("sets {i} and {j} are {d} < {sep} apart"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn max_multiplicity<'a>(n: usize, sets: impl Iterator<Item = &'a Vec<usize>>) -> Vec<usize> {
    let mut count = vec![0; n];
    for s in sets {
        for &v in s {
            count[v] += 1;
        }
    }
    count
}

impl WellSeparatedClustering {
    /// Wraps clusterings and records their load.
    pub fn new(n: usize, clusterings: Vec<Clustering>) -> Self {
        let load = max_multiplicity(n, clusterings.iter().flat_map(|c| &c.clusters))
            .into_iter()
            .max()
            .unwrap_or(0);
        Self {
            n,
            clusterings,
            load,
        }
    }

    /// `w`, the number of clusterings.
    pub fn width(&self) -> usize {
        self.clusterings.len()
    }

    /// A cluster of maximum cardinality; ties go to the first in
    /// (clustering, cluster) order.
    pub fn largest_cluster(&self) -> Option<LargestCluster> {
        let mut best: Option<LargestCluster> = None;
        for (i, c) in self.clusterings.iter().enumerate() {
            for (j, s) in c.clusters.iter().enumerate() {
                if best.as_ref().is_none_or(|b| s.len() > b.size()) {
                    best = Some(LargestCluster {
                        clustering: i,
                        cluster: j,
                        vertices: s.clone(),
                    });
                }
            }
        }
        best
    }

    /// Re-checks coverage, disjointness, diameters, separation and load
    /// against `g` from scratch.
    pub fn validate(&self, g: &MultiGraph) -> Result<(), String> {
        if g.n() != self.n {
            return Err("vertex count differs from the graph".into());
        }
        let count = max_multiplicity(self.n, self.clusterings.iter().flat_map(|c| &c.clusters));
        if let Some(v) = count.iter().position(|&c| c == 0) {
            return Err(format!("vertex {v} is not covered"));
        }
        if count.iter().copied().max().unwrap_or(0) != self.load {
            return Err("recorded load differs from recount".into());
        }
        for (i, c) in self.clusterings.iter().enumerate() {
            let inner = max_multiplicity(self.n, c.clusters.iter());
            if inner.iter().any(|&x| x > 1) {
                return Err(format!("clustering {i} has overlapping clusters"));
            }
            for (j, s) in c.clusters.iter().enumerate() {
                if s.is_empty() {
                    return Err(format!("cluster {j} of clustering {i} is empty"));
                }
                match g.diam(s) {
                    Some(d) if d <= c.diameter_bound => {}
                    _ => return Err(format!("cluster {j} of clustering {i} is too wide")),
                }
            }
            check_separation(g, &c.clusters, c.separation_bound)
                .map_err(|e| format!("clustering {i}: {e}"))?;
        }
        Ok(())
    }
}

/// Greedy ball carving. Each clustering repeatedly takes the lowest-index
/// vertex that is still uncovered and eligible, carves the eligible part of
/// its radius-`⌊h_diam/2⌋` ball, and makes everything within
/// `⌊h_diam/2⌋ + h_sep - 1` of the center ineligible for this clustering.
pub fn build_cover(
    g: &MultiGraph,
    h_sep: usize,
    h_diam: usize,
    load_max: usize,
) -> Result<WellSeparatedClustering, ClusteringError> {
    if h_sep < 1 || h_diam < h_sep {
        return Err(ClusteringError::InvalidParameters(format!(
            "need h_diam >= h_sep >= 1, got h_sep = {h_sep}, h_diam = {h_diam}"
        )));
    }
    let n = g.n();
    let radius = h_diam / 2;
    let exclusion = radius + h_sep - 1;
    let mut covered = vec![false; n];
    let mut n_covered = 0;
    let mut clusterings = Vec::new();
    while n_covered < n {
        if clusterings.len() == load_max {
            return Err(ClusteringError::CoverInfeasible {
                load_max,
                covered: n_covered,
                n,
            });
        }
        let mut eligible = vec![true; n];
        let mut clusters = Vec::new();
        for v in 0..n {
            if covered[v] || !eligible[v] {
                continue;
            }
            let dist = g.bfs_bounded(v, exclusion);
            let cluster: Vec<usize> = (0..n)
                .filter(|&u| eligible[u] && dist[u].is_some_and(|d| d <= radius))
                .collect();
            for (u, d) in dist.iter().enumerate() {
                if d.is_some() {
                    eligible[u] = false;
                }
            }
            for &u in &cluster {
                if !covered[u] {
                    covered[u] = true;
                    n_covered += 1;
                }
            }
            clusters.push(cluster);
        }
        clusterings.push(Clustering {
            clusters,
            diameter_bound: h_diam,
            separation_bound: h_sep,
        });
    }
    Ok(WellSeparatedClustering::new(n, clusterings))
}

/// Parameters of the clustering decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecomposeParams {
    pub c: f64,
    pub c_prime: f64,
    pub k: usize,
    pub k_prime: u64,
}

impl DecomposeParams {
    /// `cn/(wk) - n/k'`, the lower end of the admissible block size.
    pub fn min_block(&self, n: usize, w: usize) -> f64 {
        self.c * n as f64 / (w * self.k) as f64 - n as f64 / self.k_prime as f64
    }

    /// `⌈cn/(wk) - n/k'⌉`.
    pub fn block_size(&self, n: usize, w: usize) -> usize {
        (self.min_block(n, w) - 1e-9).ceil().max(0.0) as usize
    }

    /// `(2c + 1/(c'k') + load·w·k/(c·k'))·n`.
    pub fn dropped_bound(&self, n: usize, w: usize, load: usize) -> f64 {
        let kp = self.k_prime as f64;
        (2.0 * self.c
            + 1.0 / (self.c_prime * kp)
            + (load * w * self.k) as f64 / (self.c * kp))
            * n as f64
    }
}

/// `g` groups of exactly `k` equal-size blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub n: usize,
    pub groups: Vec<Vec<Vec<usize>>>,
    pub block_size: usize,
    pub separation_bound: usize,
    pub load: usize,
    pub dropped: Vec<usize>,
}

impl Grouping {
    pub fn g(&self) -> usize {
        self.groups.len()
    }

    pub fn k(&self) -> usize {
        self.groups.first().map_or(0, Vec::len)
    }

    /// Number of groups containing each vertex.
    pub fn vertex_loads(&self) -> Vec<usize> {
        max_multiplicity(self.n, self.groups.iter().flatten())
    }

    /// Re-checks block sizes, disjointness, separation, load and the dropped
    /// set against `g` from scratch.
    pub fn validate(&self, graph: &MultiGraph, k: usize) -> Result<(), String> {
        if self.block_size == 0 {
            return Err("block size is zero".into());
        }
        for (j, group) in self.groups.iter().enumerate() {
            if group.len() != k {
                return Err(format!("group {j} has {} blocks, expected {k}", group.len()));
            }
            for (i, b) in group.iter().enumerate() {
                if b.len() != self.block_size {
                    return Err(format!("block {i} of group {j} has size {}", b.len()));
                }
            }
            if max_multiplicity(self.n, group.iter()).iter().any(|&x| x > 1) {
                return Err(format!("group {j} has overlapping blocks"));
            }
            check_separation(graph, group, self.separation_bound)
                .map_err(|e| format!("group {j}: {e}"))?;
        }
        let loads = self.vertex_loads();
        if loads.iter().copied().max().unwrap_or(0) != self.load {
            return Err("recorded load differs from recount".into());
        }
        let dropped: Vec<usize> = (0..self.n).filter(|&v| loads[v] == 0).collect();
        if dropped != self.dropped {
            return Err("dropped set differs from recount".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decomposition {
    Grouping(Grouping),
    /// Every clustering was too small; all vertices are dropped.
    Empty { dropped: Vec<usize> },
}

impl Decomposition {
    pub fn dropped(&self) -> &[usize] {
        match self {
            Self::Grouping(g) => &g.dropped,
            Self::Empty { dropped } => dropped,
        }
    }
}

/// Splits and merges a well-separated clustering into groups of `k` blocks
/// of size exactly `⌈cn/(wk) - n/k'⌉`.
pub fn decompose(
    nc: &WellSeparatedClustering,
    p: &DecomposeParams,
) -> Result<Decomposition, ClusteringError> {
    let n = nc.n;
    let w = nc.width();
    if !(p.c > 0.0 && p.c < 1.0 && p.c_prime > 0.0 && p.c_prime < 1.0) {
        return Err(ClusteringError::PreconditionViolated(
            "c and c' must lie in (0, 1)".into(),
        ));
    }
    if p.k == 0 || p.k_prime == 0 {
        return Err(ClusteringError::PreconditionViolated(
            "k and k' must be positive".into(),
        ));
    }
    if w == 0 {
        return Ok(Decomposition::Empty {
            dropped: (0..n).collect(),
        });
    }
    if (p.k_prime as f64) * p.c * (1.0 - p.c_prime) < (w * p.k) as f64 * (1.0 - 1e-12) {
        return Err(ClusteringError::PreconditionViolated(format!(
            "k' = {} < wk/(c(1-c')) = {}",
            p.k_prime,
            (w * p.k) as f64 / (p.c * (1.0 - p.c_prime))
        )));
    }
    let threshold = p.c * n as f64 / w as f64;
    let reaches = |size: usize| size as f64 >= threshold - 1e-9;
    let lower = p.min_block(n, w);
    let block_size = p.block_size(n, w);
    let separation = nc
        .clusterings
        .iter()
        .map(|c| c.separation_bound)
        .min()
        .unwrap_or(0);

    let mut groups = Vec::new();
    for clustering in nc.clusterings.iter().filter(|c| reaches(c.size())) {
        // split into pieces of at least c·n/w, keeping clusters intact
        let mut piece: Vec<&Vec<usize>> = Vec::new();
        let mut piece_size = 0;
        for s in &clustering.clusters {
            piece.push(s);
            piece_size += s.len();
            if reaches(piece_size) {
                if let Some(group) = merge_piece(&piece, p.k, lower, block_size) {
                    groups.push(group);
                }
                piece.clear();
                piece_size = 0;
            }
        }
    }
    if groups.is_empty() {
        return Ok(Decomposition::Empty {
            dropped: (0..n).collect(),
        });
    }
    let mut grouping = Grouping {
        n,
        groups,
        block_size,
        separation_bound: separation,
        load: 0,
        dropped: Vec::new(),
    };
    let loads = grouping.vertex_loads();
    grouping.load = loads.iter().copied().max().unwrap_or(0);
    grouping.dropped = (0..n).filter(|&v| loads[v] == 0).collect();
    Ok(Decomposition::Grouping(grouping))
}

/// Concatenates clusters into blocks of size at least `lower`, keeps the
/// first `k` blocks and truncates each to `size` vertices. Clusters enter a
/// block in index order with their vertices sorted, so truncation only
/// touches the last cluster of a block.
fn merge_piece(piece: &[&Vec<usize>], k: usize, lower: f64, size: usize) -> Option<Vec<Vec<usize>>> {
    let mut blocks = Vec::with_capacity(k);
    let mut block: Vec<usize> = Vec::new();
    for s in piece {
        let mut sorted = (*s).clone();
        sorted.sort_unstable();
        block.extend(sorted);
        if block.len() as f64 >= lower - 1e-9 {
            block.truncate(size);
            blocks.push(std::mem::take(&mut block));
            if blocks.len() == k {
                return Some(blocks);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_cover() {
        let g = MultiGraph::new(1);
        let nc = build_cover(&g, 1, 1, 10).unwrap();
        assert_eq!(nc.width(), 1);
        assert_eq!(nc.load, 1);
        assert_eq!(nc.clusterings[0].clusters, vec![vec![0]]);
    }

    #[test]
    fn complete_graph_is_one_cluster() {
        let g = MultiGraph::complete(6);
        let nc = build_cover(&g, 2, 2, 10).unwrap();
        assert_eq!(nc.width(), 1);
        assert_eq!(nc.clusterings[0].clusters, vec![(0..6).collect::<Vec<_>>()]);
        nc.validate(&g).unwrap();
    }

    #[test]
    fn path_cover_is_valid_and_narrow() {
        let g = MultiGraph::path(9);
        let nc = build_cover(&g, 2, 2, 10).unwrap();
        nc.validate(&g).unwrap();
        assert!(nc.width() <= 3);
    }

    #[test]
    fn cover_limits() {
        let g = MultiGraph::path(9);
        assert!(matches!(
            build_cover(&g, 2, 2, 1),
            Err(ClusteringError::CoverInfeasible { load_max: 1, .. })
        ));
        assert!(matches!(
            build_cover(&g, 3, 2, 5),
            Err(ClusteringError::InvalidParameters(_))
        ));
    }

    #[test]
    fn largest_cluster_ties_and_sizes() {
        let nc = WellSeparatedClustering::new(
            3,
            vec![Clustering {
                clusters: vec![vec![0], vec![1, 2]],
                diameter_bound: 1,
                separation_bound: 1,
            }],
        );
        let big = nc.largest_cluster().unwrap();
        assert_eq!((big.vertices.clone(), big.size()), (vec![1, 2], 2));
        let singles = WellSeparatedClustering::new(
            2,
            vec![Clustering {
                clusters: vec![vec![1], vec![0]],
                diameter_bound: 0,
                separation_bound: 1,
            }],
        );
        assert_eq!(singles.largest_cluster().unwrap().vertices, vec![1]);
    }

    #[test]
    fn eight_singletons() {
        let g = MultiGraph::new(8);
        let nc = WellSeparatedClustering::new(
            8,
            vec![Clustering {
                clusters: (0..8).map(|v| vec![v]).collect(),
                diameter_bound: 0,
                separation_bound: 5,
            }],
        );
        let p = DecomposeParams {
            c: 0.5,
            c_prime: 0.5,
            k: 2,
            k_prime: 32,
        };
        let Decomposition::Grouping(gr) = decompose(&nc, &p).unwrap() else {
            panic!("expected a grouping");
        };
        assert_eq!(gr.block_size, 2);
        // the greedy split yields two pieces of four singletons
        assert_eq!(gr.g(), 2);
        assert_eq!(gr.groups[0], vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(gr.groups[1], vec![vec![4, 5], vec![6, 7]]);
        assert!(gr.g() as f64 <= 1.0 / p.c);
        gr.validate(&g, 2).unwrap();
        assert!(gr.dropped.len() as f64 <= p.dropped_bound(8, 1, gr.load));
    }

    #[test]
    fn small_clusterings_give_empty_result() {
        // c·n/w = 2 exceeds every clustering's size
        let nc = WellSeparatedClustering::new(
            8,
            (0..2)
                .map(|v| Clustering {
                    clusters: vec![vec![v]],
                    diameter_bound: 0,
                    separation_bound: 1,
                })
                .collect(),
        );
        let p = DecomposeParams {
            c: 0.5,
            c_prime: 0.5,
            k: 2,
            k_prime: 16,
        };
        match decompose(&nc, &p).unwrap() {
            Decomposition::Empty { dropped } => assert_eq!(dropped.len(), 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn preconditions_reported() {
        let nc = WellSeparatedClustering::new(
            4,
            vec![Clustering {
                clusters: vec![vec![0, 1], vec![2, 3]],
                diameter_bound: 1,
                separation_bound: 1,
            }],
        );
        let p = DecomposeParams {
            c: 0.5,
            c_prime: 0.5,
            k: 2,
            k_prime: 7,
        };
        assert!(matches!(
            decompose(&nc, &p),
            Err(ClusteringError::PreconditionViolated(_))
        ));
        let p = DecomposeParams { c: 1.5, k_prime: 64, ..p };
        assert!(matches!(
            decompose(&nc, &p),
            Err(ClusteringError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn default_table_constants() {
        let c = 1.0 / (2.0 * 3.0 * 6.0 * 9.0);
        assert_eq!(1.0 / c, 324.0);
        let k_prime: u64 = 324 * 324 * 2 * 3 * 16;
        assert_eq!(k_prime, 10_077_696);
    }
}
