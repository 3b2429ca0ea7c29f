//! Turning a cut strategy into either a sparse cut or an embedded
//! expander, one max-flow per bisection.
//!
//! Each round the strategy proposes a bisection `(S, S̄)` of the expander
//! built so far. Vertices of `S` receive their degree from a super-source,
//! vertices of `S̄` send their degree to a super-sink, and every edge of `G`
//! gets capacity `⌈1/φ⌉`. A flow short of `min(vol S, vol S̄)` exposes a
//! cut of sparsity below `φ`; otherwise the unit flow paths become new
//! expander edges.

use super::maxflow::FlowNetwork;
use super::HarnessError;
use crate::graph::{pair, MultiGraph, Pair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub trait CutStrategy {
    fn name(&self) -> &str;

    /// One side of a bisection of `0..expander.n()`, or `None` when the
    /// strategy has nothing left to propose.
    fn next_bisection(&mut self, expander: &MultiGraph, round: usize) -> Option<Vec<usize>>;
}

/// Round `r` splits by the index rotated right by `r` bits; round 0 is the
/// lower half against the upper half.
#[derive(Debug, Clone, Default)]
pub struct BitBisection {
    pub max_rounds: Option<usize>,
}

fn bits_for(n: usize) -> u32 {
    usize::BITS - (n.max(2) - 1).leading_zeros()
}

impl CutStrategy for BitBisection {
    fn name(&self) -> &str {
        "bits"
    }

    fn next_bisection(&mut self, expander: &MultiGraph, round: usize) -> Option<Vec<usize>> {
        if self.max_rounds.is_some_and(|m| round >= m) {
            return None;
        }
        let n = expander.n();
        let bits = bits_for(n);
        let shift = round as u32 % bits;
        let mask = (1usize << bits) - 1;
        let key = |v: usize| ((v >> shift) | (v << (bits - shift))) & mask;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (key(v), v));
        let mut side = order[..n / 2].to_vec();
        side.sort_unstable();
        Some(side)
    }
}

/// Projects a random ±1 vector through a lazy walk on the current expander
/// and splits at the median.
#[derive(Debug, Clone)]
pub struct RandomProjection {
    rng: ChaCha8Rng,
    pub walk_steps: usize,
}

impl RandomProjection {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            walk_steps: 8,
        }
    }
}

impl CutStrategy for RandomProjection {
    fn name(&self) -> &str {
        "projection"
    }

    fn next_bisection(&mut self, expander: &MultiGraph, _round: usize) -> Option<Vec<usize>> {
        let n = expander.n();
        let mut x: Vec<f64> = (0..n)
            .map(|_| if self.rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        for _ in 0..self.walk_steps {
            let mut next = x.clone();
            for v in 0..n {
                let d = expander.degree(v);
                if d == 0 {
                    continue;
                }
                let avg: f64 = expander.incident(v).iter().map(|&(u, _)| x[u]).sum::<f64>() / d as f64;
                next[v] = 0.5 * x[v] + 0.5 * avg;
            }
            x = next;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let mut side = order[..n / 2].to_vec();
        side.sort_unstable();
        Some(side)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseCut {
    /// The source side, original vertices only.
    pub side: Vec<usize>,
    pub edge_ids: Vec<usize>,
    pub edges: Vec<Pair>,
    pub sparsity: f64,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedEdge {
    pub edge: Pair,
    /// Vertex path in `G` from one endpoint to the other.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub edges: Vec<EmbeddedEdge>,
    pub rounds: usize,
    /// Largest number of paths over one edge copy of `G`.
    pub congestion: f64,
    /// `rounds · ⌈1/φ⌉`.
    pub congestion_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EmbeddingOrCut {
    SparseCut(SparseCut),
    Embedding(Embedding),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrvReport {
    pub n: usize,
    pub phi: f64,
    pub capacity: u64,
    /// An isolated vertex was added to make `n` even.
    pub padded: bool,
    pub result: EmbeddingOrCut,
}

/// `⌈log₂ n⌉²`, at least 1.
pub fn default_rounds(n: usize) -> usize {
    let b = bits_for(n) as usize;
    (b * b).max(1)
}

/// Largest number of embedded paths over one edge copy of `g`.
pub fn recount_congestion(g: &MultiGraph, edges: &[EmbeddedEdge]) -> f64 {
    let mut load: BTreeMap<Pair, usize> = BTreeMap::new();
    for e in edges {
        for w in e.path.windows(2) {
            *load.entry(pair(w[0], w[1])).or_default() += 1;
        }
    }
    load.iter()
        .map(|(p, &l)| l as f64 / g.multiplicity(p.0, p.1).max(1) as f64)
        .fold(0.0, f64::max)
}

pub fn krv_reduce(
    g: &MultiGraph,
    phi: f64,
    strategy: &mut dyn CutStrategy,
    rounds: Option<usize>,
) -> Result<KrvReport, HarnessError> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(HarnessError::InvalidInput(format!("phi = {phi} must lie in (0, 1]")));
    }
    let n0 = g.n();
    let padded = n0 % 2 == 1;
    let n = n0 + padded as usize;
    let capacity = (1.0 / phi - 1e-9).ceil() as u64;
    let rounds = rounds.unwrap_or_else(|| default_rounds(n));
    let deg = |v: usize| if v < n0 { g.degree(v) as u64 } else { 0 };
    let mut expander = MultiGraph::new(n);
    let mut embedded = Vec::new();
    for round in 0..rounds {
        let side = strategy
            .next_bisection(&expander, round)
            .ok_or(HarnessError::StrategyExhausted { round })?;
        let mut in_s = vec![false; n];
        for &v in &side {
            if v >= n || in_s[v] {
                return Err(HarnessError::InvalidBisection(format!("bad vertex {v} in round {round}")));
            }
            in_s[v] = true;
        }
        if side.len() != n / 2 {
            return Err(HarnessError::InvalidBisection(format!(
                "side of size {} in round {round}, expected {}",
                side.len(),
                n / 2
            )));
        }
        let (s, t) = (n, n + 1);
        let mut net = FlowNetwork::new(n + 2, s, t)?;
        for v in 0..n {
            if in_s[v] {
                net.add_arc(s, v, deg(v));
            } else {
                net.add_arc(v, t, deg(v));
            }
        }
        let mut arc_edge = BTreeMap::new();
        for (id, &(u, v)) in g.edges().iter().enumerate() {
            let a = net.add_edge_undirected(u, v, capacity);
            arc_edge.insert(a, id);
        }
        let vol_s: u64 = (0..n).filter(|&v| in_s[v]).map(deg).sum();
        let vol_t: u64 = (0..n).filter(|&v| !in_s[v]).map(deg).sum();
        let target = vol_s.min(vol_t);
        let value = net.max_flow();
        if value < target {
            let reach = net.source_side();
            let x: Vec<usize> = (0..n0).filter(|&v| reach[v]).collect();
            let edge_ids: Vec<usize> = (0..g.m())
                .filter(|&id| {
                    let (u, v) = g.edge(id);
                    reach[u] != reach[v]
                })
                .collect();
            let vol_x: usize = x.iter().map(|&v| g.degree(v)).sum();
            let vol_rest = 2 * g.m() - vol_x;
            let denom = vol_x.min(vol_rest);
            let sparsity = if denom == 0 {
                f64::INFINITY
            } else {
                edge_ids.len() as f64 / denom as f64
            };
            return Ok(KrvReport {
                n: n0,
                phi,
                capacity,
                padded,
                result: EmbeddingOrCut::SparseCut(SparseCut {
                    side: x,
                    edges: edge_ids.iter().map(|&id| g.edge(id)).collect(),
                    edge_ids,
                    sparsity,
                    round,
                }),
            });
        }
        for p in net.path_decomposition() {
            let vs = net.path_vertices(&p);
            let path = vs[1..vs.len() - 1].to_vec();
            let (a, b) = (path[0], *path.last().expect("path has an interior"));
            if a != b {
                expander.add_edge(a, b).expect("endpoints are distinct");
            }
            embedded.push(EmbeddedEdge { edge: pair(a, b), path });
        }
    }
    let congestion = recount_congestion(g, &embedded);
    Ok(KrvReport {
        n: n0,
        phi,
        capacity,
        padded,
        result: EmbeddingOrCut::Embedding(Embedding {
            edges: embedded,
            rounds,
            congestion,
            congestion_bound: (rounds as u64 * capacity) as f64,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barbell_gives_bridge() {
        let g = MultiGraph::barbell(5);
        let r = krv_reduce(&g, 0.1, &mut BitBisection::default(), None).unwrap();
        let EmbeddingOrCut::SparseCut(c) = r.result else {
            panic!("expected a cut");
        };
        assert_eq!(c.edges, vec![(4, 5)]);
        assert_eq!(c.side, vec![0, 1, 2, 3, 4]);
        assert!((c.sparsity - 1.0 / 21.0).abs() < 1e-12);
        assert!(c.sparsity <= 0.1);
    }

    #[test]
    fn hypercube_embeds() {
        let g = MultiGraph::hypercube(4);
        let r = krv_reduce(&g, 1.0 / 16.0, &mut BitBisection::default(), None).unwrap();
        let EmbeddingOrCut::Embedding(e) = r.result else {
            panic!("expected an embedding");
        };
        assert_eq!(e.rounds, 16);
        assert!(e.congestion <= e.congestion_bound);
        for ee in &e.edges {
            assert_eq!(pair(ee.path[0], *ee.path.last().unwrap()), ee.edge);
            for w in ee.path.windows(2) {
                assert!(g.multiplicity(w[0], w[1]) > 0);
            }
        }
    }

    #[test]
    fn single_edge() {
        let g = MultiGraph::complete(2);
        let r = krv_reduce(&g, 0.5, &mut BitBisection::default(), None).unwrap();
        let EmbeddingOrCut::Embedding(e) = r.result else {
            panic!("expected an embedding");
        };
        assert_eq!(e.edges.len(), 1);
        assert_eq!(e.edges[0].path, vec![0, 1]);
    }

    #[test]
    fn odd_n_is_padded() {
        let g = MultiGraph::cycle(5);
        let r = krv_reduce(&g, 0.5, &mut RandomProjection::new(1), None).unwrap();
        assert!(r.padded);
    }

    #[test]
    fn exhausted_strategy() {
        let g = MultiGraph::cycle(4);
        let mut s = BitBisection { max_rounds: Some(1) };
        assert!(matches!(
            krv_reduce(&g, 0.5, &mut s, Some(3)),
            Err(HarnessError::StrategyExhausted { round: 1 })
        ));
    }
}
