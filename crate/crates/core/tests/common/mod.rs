#![allow(dead_code)]

use hopcut::graph::{pair, Demand, MultiGraph, Pair};
use hopcut::harness::FlowNetwork;
use hopcut::mixing::MixerSystem;
use hopcut::pseudo::PseudoDistribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn entropy_scalar(values: &[f64]) -> f64 {
    let mut h = 0.0;
    for &u in values {
        if u > 0.0 {
            h -= u * u.ln();
        }
    }
    h
}

/// Entries in `[0, 1]` with total at most `cap`.
pub fn random_pd(rng: &mut ChaCha8Rng, len: usize, cap: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let scale = rng.gen::<f64>() * cap / total.max(1e-12);
    raw.iter().map(|x| (x * scale).min(1.0)).collect()
}

/// Random normalized weights over `m` parts with every share at most `1/gamma`.
pub fn capped_shares(rng: &mut ChaCha8Rng, m: usize, gamma: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let y: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let uniform = 1.0 / m as f64;
    let top = y.iter().copied().fold(0.0, f64::max);
    let cap = 1.0 / gamma as f64;
    let lambda = if top <= cap || m == gamma {
        if m == gamma {
            0.0
        } else {
            1.0
        }
    } else {
        (cap - uniform) / (top - uniform)
    };
    y.iter().map(|v| lambda * v + (1.0 - lambda) * uniform).collect()
}

pub fn random_shares(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn random_mixer_system(rng: &mut ChaCha8Rng, n: usize) -> MixerSystem {
    let count = rng.gen_range(1..=2 * n);
    let mixers = (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=n);
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            all.truncate(size);
            all
        })
        .collect();
    MixerSystem::from_mixers(n, mixers).unwrap().cover_with_singletons()
}

pub fn pd(values: Vec<f64>) -> PseudoDistribution {
    PseudoDistribution::new(values).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> MultiGraph {
    let mut g = MultiGraph::new(n);
    if n < 2 {
        return g;
    }
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        g.add_edge(u, v).unwrap();
    }
    g
}

/// Directed network on `n` vertices, source 0, sink `n - 1`, and its arcs.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize) -> (FlowNetwork, Vec<(usize, usize, u64)>) {
    let mut net = FlowNetwork::new(n, 0, n - 1).unwrap();
    let mut arcs = Vec::new();
    let count = rng.gen_range(0..=3 * n);
    for _ in 0..count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let cap = rng.gen_range(0..=6);
        net.add_arc(u, v, cap);
        arcs.push((u, v, cap));
    }
    (net, arcs)
}

/// Smallest `s-t` cut capacity by enumerating every source side.
pub fn brute_min_cut(n: usize, arcs: &[(usize, usize, u64)]) -> u64 {
    let (s, t) = (0, n - 1);
    let free: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best = u64::MAX;
    for mask in 0u32..(1 << free.len()) {
        let mut side = vec![false; n];
        side[s] = true;
        for (i, &v) in free.iter().enumerate() {
            side[v] = mask & (1 << i) != 0;
        }
        let cap = arcs
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c)
            .sum();
        best = best.min(cap);
    }
    best
}

/// Every simple path from `s` to `v` with at most `t` edges.
pub fn simple_paths(g: &MultiGraph, s: usize, v: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(g: &MultiGraph, path: &mut Vec<usize>, v: usize, t: usize, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == v {
            out.push(path.clone());
            return;
        }
        if path.len() > t {
            return;
        }
        for u in g.neighbors(last) {
            if !path.contains(&u) {
                path.push(u);
                walk(g, path, v, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(g, &mut vec![s], v, t, &mut out);
    out
}

/// Smallest congestion over routings that send every demand in
/// `1/chunks`-unit pieces along simple `t`-hop paths. `None` if some pair is
/// farther than `t` apart.
pub fn discretized_congestion(g: &MultiGraph, d: &Demand, t: usize, chunks: usize) -> Option<f64> {
    let bundles: Vec<Pair> = g.bundles().keys().copied().collect();
    let index: BTreeMap<Pair, usize> = bundles.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mult: Vec<f64> = bundles.iter().map(|b| g.multiplicity(b.0, b.1) as f64).collect();
    let mut pairs = Vec::new();
    for ((s, v), value) in d.entries() {
        let paths = simple_paths(g, s, v, t);
        if paths.is_empty() {
            return None;
        }
        let routes: Vec<Vec<usize>> = paths
            .iter()
            .map(|p| p.windows(2).map(|w| index[&pair(w[0], w[1])]).collect())
            .collect();
        pairs.push((routes, (value * chunks as f64).round() as usize));
    }
    let unit = 1.0 / chunks as f64;
    let mut load = vec![0.0; bundles.len()];
    let mut best = f64::INFINITY;

    fn peak(load: &[f64], mult: &[f64]) -> f64 {
        load.iter().zip(mult).map(|(l, m)| l / m).fold(0.0, f64::max)
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        pairs: &[(Vec<Vec<usize>>, usize)],
        i: usize,
        path: usize,
        left: usize,
        unit: f64,
        load: &mut Vec<f64>,
        mult: &[f64],
        best: &mut f64,
    ) {
        if peak(load, mult) >= *best - 1e-12 {
            return;
        }
        if i == pairs.len() {
            *best = peak(load, mult);
            return;
        }
        let routes = &pairs[i].0;
        if path + 1 == routes.len() {
            for &b in &routes[path] {
                load[b] += left as f64 * unit;
            }
            let next = pairs.get(i + 1).map_or(0, |p| p.1);
            assign(pairs, i + 1, 0, next, unit, load, mult, best);
            for &b in &routes[path] {
                load[b] -= left as f64 * unit;
            }
            return;
        }
        for c in (0..=left).rev() {
            for &b in &routes[path] {
                load[b] += c as f64 * unit;
            }
            assign(pairs, i, path + 1, left - c, unit, load, mult, best);
            for &b in &routes[path] {
                load[b] -= c as f64 * unit;
            }
        }
    }

    if pairs.is_empty() {
        return Some(0.0);
    }
    let first = pairs[0].1;
    assign(&pairs, 0, 0, first, unit, &mut load, &mult, &mut best);
    Some(best)
}

/// Up to `max_pairs` unit pairs with distinct sources and distinct targets.
pub fn random_unit_demand(rng: &mut ChaCha8Rng, n: usize, max_pairs: usize) -> Demand {
    let mut sources: Vec<usize> = (0..n).collect();
    let mut targets: Vec<usize> = (0..n).collect();
    sources.shuffle(rng);
    targets.shuffle(rng);
    let count = rng.gen_range(1..=max_pairs);
    let mut d = Demand::new();
    for (&s, &v) in sources.iter().zip(&targets).filter(|(s, v)| s != v).take(count) {
        d.add(s, v, 1.0);
    }
    d
}
