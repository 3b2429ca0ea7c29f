//! Verification-driven hop-constrained expander decomposition.
//!
//! Sampled `h`-hop unit demands are routed in `G - C` along `⌊s·h⌋`-hop
//! paths with congestion `κ/φ`. While some sample fails, one copy of the most
//! congested edge bundle of its optimal routing joins the cut. The result is
//! heuristic: only sampled demands are certified.

use crate::graph::{
    pair, route_demand_exact, verify_routing, Demand, MultiGraph, Pair, RoutingBackend,
    RoutingError,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("invalid decomposition parameters: {0}")]
    InvalidParams(String),
    #[error("no cut of size at most {budget} passes the sampled demands")]
    BudgetExhausted { budget: usize },
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub h: usize,
    pub s: f64,
    pub phi: f64,
    pub kappa: f64,
}

impl DecompositionParams {
    pub fn validate(&self) -> Result<(), DecompError> {
        let bad = |m: &str| Err(DecompError::InvalidParams(m.into()));
        if self.h < 1 {
            return bad("h must be at least 1");
        }
        if !(self.s >= 1.0) {
            return bad("s must be at least 1");
        }
        if !(self.phi > 0.0) {
            return bad("phi must be positive");
        }
        if !(self.kappa >= 1.0) {
            return bad("kappa must be at least 1");
        }
        Ok(())
    }

    /// `⌊h·s·κ·φ·n⌋`, the largest admissible cut.
    pub fn budget(&self, n: usize) -> usize {
        (self.h as f64 * self.s * self.kappa * self.phi * n as f64 + 1e-9).floor() as usize
    }

    /// `⌊s·h⌋`.
    pub fn hop_bound(&self) -> usize {
        (self.s * self.h as f64 + 1e-9).floor() as usize
    }

    /// `κ/φ`.
    pub fn congestion(&self) -> f64 {
        self.kappa / self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub random: usize,
    pub adversarial: usize,
    pub seed: u64,
    pub backend: RoutingBackend,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            random: 32,
            adversarial: 8,
            seed: 0,
            backend: RoutingBackend::ColumnGeneration,
        }
    }
}

/// Removed edge copies, by id in the host graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub edge_ids: Vec<usize>,
    pub edges: Vec<Pair>,
}

impl Cut {
    pub fn size(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }

    /// `G - C` and the map from its edge ids to ids in `g`.
    pub fn apply(&self, g: &MultiGraph) -> (MultiGraph, Vec<usize>) {
        g.without_edges(&self.edge_ids)
    }
}

/// Random maximal matching of `h`-close pairs, routed in both directions.
fn random_matching_demand(close: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Demand {
    let n = close.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut matched = vec![false; n];
    let mut d = Demand::new();
    for &u in &order {
        if matched[u] {
            continue;
        }
        let free: Vec<usize> = close[u].iter().copied().filter(|&v| !matched[v]).collect();
        if let Some(&v) = free.choose(rng) {
            matched[u] = true;
            matched[v] = true;
            d.add(u, v, 1.0);
            d.add(v, u, 1.0);
        }
    }
    d
}

/// Pairs vertices across the sparsest BFS-level cut around a random root.
fn adversarial_demand(
    g: &MultiGraph,
    close: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
) -> Demand {
    let n = g.n();
    let mut d = Demand::new();
    if n < 2 {
        return d;
    }
    let root = rng.gen_range(0..n);
    let dist = g.bfs(root);
    let depth = dist.iter().flatten().copied().max().unwrap_or(0);
    let mut best: Option<(f64, usize)> = None;
    for level in 0..depth {
        let inside: Vec<usize> = (0..n).filter(|&v| dist[v].is_some_and(|x| x <= level)).collect();
        let vol_in = g.volume(&inside);
        let vol_out = 2 * g.m() - vol_in;
        let smaller = vol_in.min(vol_out).max(1);
        let ratio = g.boundary_size(&inside) as f64 / smaller as f64;
        if best.is_none_or(|(r, _)| ratio < r) {
            best = Some((ratio, level));
        }
    }
    let Some((_, level)) = best else {
        return d;
    };
    let inside = |v: usize| dist[v].is_some_and(|x| x <= level);
    let mut near: Vec<usize> = (0..n).filter(|&v| inside(v)).collect();
    near.sort_by_key(|&v| std::cmp::Reverse(dist[v]));
    let mut matched = vec![false; n];
    for u in near {
        let far = close[u]
            .iter()
            .copied()
            .filter(|&v| !inside(v) && !matched[v])
            .min_by_key(|&v| (dist[v], v));
        if let Some(v) = far {
            matched[u] = true;
            matched[v] = true;
            d.add(u, v, 1.0);
            d.add(v, u, 1.0);
        }
    }
    d
}

/// The demand sample used by the decomposition: `random` maximal matchings
/// followed by `adversarial` level-cut demands. All are `h`-hop unit demands.
pub fn sample_demands(g: &MultiGraph, h: usize, count: (usize, usize), rng: &mut ChaCha8Rng) -> Vec<Demand> {
    let close: Vec<Vec<usize>> = (0..g.n())
        .map(|v| g.ball(v, h).into_iter().filter(|&u| u != v).collect())
        .collect();
    let mut out = Vec::with_capacity(count.0 + count.1);
    for _ in 0..count.0 {
        out.push(random_matching_demand(&close, rng));
    }
    for _ in 0..count.1 {
        out.push(adversarial_demand(g, &close, rng));
    }
    out.retain(|d| !d.is_empty());
    out
}

/// Certify-or-cut loop. Returns a cut within budget whose complement passes
/// every sampled demand, or `BudgetExhausted`.
pub fn expander_decomposition(
    g: &MultiGraph,
    params: &DecompositionParams,
    sampler: &SamplerConfig,
) -> Result<Cut, DecompError> {
    params.validate()?;
    let budget = params.budget(g.n());
    let hops = params.hop_bound();
    let eta = params.congestion();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut removed: Vec<usize> = Vec::new();
    loop {
        let (rest, origin) = g.without_edges(&removed);
        let samples = sample_demands(&rest, params.h, (sampler.random, sampler.adversarial), &mut rng);
        let mut failing = None;
        for d in samples {
            if !verify_routing(&rest, &d, hops, eta, sampler.backend)?.is_feasible() {
                failing = Some(d);
                break;
            }
        }
        let Some(d) = failing else {
            let mut edge_ids = removed;
            edge_ids.sort_unstable();
            let edges = edge_ids.iter().map(|&id| g.edge(id)).collect();
            return Ok(Cut { edge_ids, edges });
        };
        if removed.len() >= budget {
            return Err(DecompError::BudgetExhausted { budget });
        }
        let best = route_demand_exact(&rest, &d, hops, RoutingBackend::ColumnGeneration)?;
        let bundles = rest.bundles();
        let (&target, _) = best
            .witness
            .flow
            .pair_loads()
            .iter()
            .map(|(e, load)| (e, load / bundles[e] as f64))
            .fold(None::<(&Pair, f64)>, |acc, (e, x)| match acc {
                Some((_, y)) if y >= x => acc,
                _ => Some((e, x)),
            })
            .expect("a failing demand routes some flow");
        let copy = rest
            .edges()
            .iter()
            .position(|&e| e == pair(target.0, target.1))
            .expect("bundle exists");
        removed.push(origin[copy]);
    }
}

/// Fraction of freshly sampled demands that route in `G - C`.
pub fn pass_rate(
    g: &MultiGraph,
    cut: &Cut,
    params: &DecompositionParams,
    sampler: &SamplerConfig,
) -> Result<f64, DecompError> {
    let (rest, _) = cut.apply(g);
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let samples = sample_demands(&rest, params.h, (sampler.random, sampler.adversarial), &mut rng);
    if samples.is_empty() {
        return Ok(1.0);
    }
    let mut ok = 0;
    for d in &samples {
        if verify_routing(&rest, d, params.hop_bound(), params.congestion(), sampler.backend)?
            .is_feasible()
        {
            ok += 1;
        }
    }
    Ok(ok as f64 / samples.len() as f64)
}
