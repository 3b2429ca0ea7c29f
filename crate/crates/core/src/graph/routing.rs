use super::lp::{LinearProgram, LpError};
use super::{pair, Demand, Flow, MultiGraph, Pair, RoutingWitness};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const DEFAULT_PATH_BUDGET: usize = 1_000_000;
const MAX_PRICING_ROUNDS: usize = 10_000;

/// How fractional routings are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoutingBackend {
    /// Enumerate every simple path within the hop bound, then solve the LP.
    Enumerate { path_budget: usize },
    /// Exact LP over paths generated on demand by hop-bounded shortest paths.
    ColumnGeneration,
    /// Approximate multiplicative-weights routing; congestion is an upper
    /// bound on the optimum.
    MultiplicativeWeights { epsilon: f64 },
}

impl Default for RoutingBackend {
    fn default() -> Self {
        Self::Enumerate {
            path_budget: DEFAULT_PATH_BUDGET,
        }
    }
}

impl RoutingBackend {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::MultiplicativeWeights { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("demand references vertex {vertex} outside a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("more than {budget} simple paths within the hop bound")]
    PathBudgetExceeded { budget: usize },
    #[error("pair ({from}, {to}) is farther than {hop_bound} hops")]
    PairTooFar {
        from: usize,
        to: usize,
        distance: Option<usize>,
        hop_bound: usize,
    },
    #[error("routing LP failed: {0}")]
    Lp(#[from] LpError),
    #[error("column generation did not converge")]
    NoConvergence,
}

/// Why a demand cannot be routed within the queried bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    PairTooFar {
        from: usize,
        to: usize,
        distance: Option<usize>,
        hop_bound: usize,
    },
    /// The smallest achievable congestion exceeds `eta`. `certified` is false
    /// when the value came from the approximate backend.
    CongestionTooHigh {
        min_congestion: f64,
        eta: f64,
        certified: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoutingVerdict {
    Feasible(RoutingWitness),
    Infeasible(Infeasibility),
}

impl RoutingVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCongestion {
    pub congestion: f64,
    pub witness: RoutingWitness,
}

struct Instance<'g> {
    g: &'g MultiGraph,
    t: usize,
    pairs: Vec<(usize, usize, f64)>,
    bundle_of: BTreeMap<Pair, usize>,
    mult: Vec<f64>,
    adj: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, PartialEq)]
struct Candidate {
    vertices: Vec<usize>,
    bundles: Vec<usize>,
}

/// `parents[h][v]`: the (previous vertex, edge) on the best `h`-hop path to `v`.
type HopParents = Vec<Vec<Option<(usize, usize)>>>;

impl<'g> Instance<'g> {
    fn new(g: &'g MultiGraph, d: &Demand, t: usize) -> Result<Self, RoutingError> {
        let n = g.n();
        let mut pairs = Vec::with_capacity(d.len());
        for ((u, v), x) in d.entries() {
            for vertex in [u, v] {
                if vertex >= n {
                    return Err(RoutingError::VertexOutOfRange { vertex, n });
                }
            }
            pairs.push((u, v, x));
        }
        let mut bundle_of = BTreeMap::new();
        let mut mult = Vec::new();
        for (e, m) in g.bundles() {
            bundle_of.insert(e, mult.len());
            mult.push(m as f64);
        }
        let adj = (0..n)
            .map(|u| {
                g.neighbors(u)
                    .into_iter()
                    .map(|v| (v, bundle_of[&pair(u, v)]))
                    .collect()
            })
            .collect();
        Ok(Self {
            g,
            t,
            pairs,
            bundle_of,
            mult,
            adj,
        })
    }

    fn candidate(&self, vertices: Vec<usize>) -> Candidate {
        let bundles = vertices
            .windows(2)
            .map(|w| self.bundle_of[&pair(w[0], w[1])])
            .collect();
        Candidate { vertices, bundles }
    }

    fn check_reach(&self) -> Result<(), RoutingError> {
        let mut by_source: BTreeMap<usize, Vec<Option<usize>>> = BTreeMap::new();
        for &(s, v, _) in &self.pairs {
            let dist = by_source
                .entry(s)
                .or_insert_with(|| self.g.bfs_bounded(s, self.t));
            if dist[v].is_none() {
                return Err(RoutingError::PairTooFar {
                    from: s,
                    to: v,
                    distance: self.g.dist(s, v),
                    hop_bound: self.t,
                });
            }
        }
        Ok(())
    }

    /// One BFS shortest path per pair.
    fn shortest_paths(&self) -> Vec<Candidate> {
        let n = self.g.n();
        let mut trees: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        self.pairs
            .iter()
            .map(|&(s, v, _)| {
                let parent = trees.entry(s).or_insert_with(|| {
                    let mut parent = vec![usize::MAX; n];
                    parent[s] = s;
                    let mut queue = std::collections::VecDeque::from([s]);
                    while let Some(u) = queue.pop_front() {
                        for &(w, _) in &self.adj[u] {
                            if parent[w] == usize::MAX {
                                parent[w] = u;
                                queue.push_back(w);
                            }
                        }
                    }
                    parent
                });
                let mut path = vec![v];
                let mut x = v;
                while x != s {
                    x = parent[x];
                    path.push(x);
                }
                path.reverse();
                self.candidate(path)
            })
            .collect()
    }

    /// Minimum-weight path from `s` to every vertex using at most `t` hops,
    /// with loops erased.
    fn hop_bounded_tree(&self, s: usize, w: &[f64]) -> (Vec<f64>, HopParents) {
        let n = self.g.n();
        let mut dist = vec![f64::INFINITY; n];
        dist[s] = 0.0;
        let mut pred = Vec::with_capacity(self.t);
        for _ in 0..self.t {
            let mut next = dist.clone();
            let mut layer = vec![None; n];
            for u in 0..n {
                if dist[u].is_finite() {
                    for &(v, b) in &self.adj[u] {
                        let cand = dist[u] + w[b];
                        if cand < next[v] - 1e-15 {
                            next[v] = cand;
                            layer[v] = Some((u, b));
                        }
                    }
                }
            }
            dist = next;
            pred.push(layer);
        }
        (dist, pred)
    }

    fn extract(&self, s: usize, v: usize, pred: &[Vec<Option<(usize, usize)>>]) -> Candidate {
        let mut walk = vec![v];
        let mut x = v;
        for layer in pred.iter().rev() {
            if let Some((u, _)) = layer[x] {
                x = u;
                walk.push(x);
            }
        }
        debug_assert_eq!(x, s);
        walk.reverse();
        let mut simple: Vec<usize> = Vec::with_capacity(walk.len());
        for x in walk {
            if let Some(p) = simple.iter().position(|&y| y == x) {
                simple.truncate(p + 1);
            } else {
                simple.push(x);
            }
        }
        self.candidate(simple)
    }

    fn enumerate(&self, budget: usize) -> Result<Vec<Vec<Candidate>>, RoutingError> {
        let mut total = 0usize;
        let mut out = Vec::with_capacity(self.pairs.len());
        for &(s, target, _) in &self.pairs {
            let to_target = self.g.bfs_bounded(target, self.t);
            let mut found = Vec::new();
            let mut path = vec![s];
            let mut on_path = vec![false; self.g.n()];
            on_path[s] = true;
            self.dfs(target, &to_target, &mut path, &mut on_path, &mut found, &mut total, budget)?;
            out.push(found);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        target: usize,
        to_target: &[Option<usize>],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Candidate>,
        total: &mut usize,
        budget: usize,
    ) -> Result<(), RoutingError> {
        let u = *path.last().unwrap();
        if u == target {
            *total += 1;
            if *total > budget {
                return Err(RoutingError::PathBudgetExceeded { budget });
            }
            found.push(self.candidate(path.clone()));
            return Ok(());
        }
        let hops = path.len() - 1;
        for &(v, _) in &self.adj[u] {
            if on_path[v] {
                continue;
            }
            match to_target[v] {
                Some(d) if hops + 1 + d <= self.t => {}
                _ => continue,
            }
            on_path[v] = true;
            path.push(v);
            self.dfs(target, to_target, path, on_path, found, total, budget)?;
            path.pop();
            on_path[v] = false;
        }
        Ok(())
    }

    /// Column generation over path variables. `price` returns, for each pair,
    /// the cheapest admissible path under the given bundle weights.
    fn solve_lp(
        &self,
        mut price: impl FnMut(&[f64]) -> Vec<(Candidate, f64)>,
    ) -> Result<(f64, Flow), RoutingError> {
        let p = self.pairs.len();
        let mut pool: Vec<(usize, Candidate)> =
            self.shortest_paths().into_iter().enumerate().collect();
        let mut seen: BTreeSet<(usize, Vec<usize>)> = pool
            .iter()
            .map(|(i, c)| (*i, c.vertices.clone()))
            .collect();
        for _ in 0..MAX_PRICING_ROUNDS {
            let active: BTreeSet<usize> = pool
                .iter()
                .flat_map(|(_, c)| c.bundles.iter().copied())
                .collect();
            let row_of: BTreeMap<usize, usize> =
                active.iter().enumerate().map(|(r, &b)| (b, p + r)).collect();
            let mut lp = LinearProgram::new(p + active.len());
            for (i, &(_, _, x)) in self.pairs.iter().enumerate() {
                lp.rhs[i] = x;
            }
            for (i, c) in &pool {
                let mut entries = vec![(*i, 1.0)];
                entries.extend(c.bundles.iter().map(|b| (row_of[b], 1.0)));
                lp.add_column(0.0, entries);
            }
            let eta_col = lp.add_column(
                1.0,
                row_of.iter().map(|(&b, &r)| (r, -self.mult[b])).collect(),
            );
            for &r in row_of.values() {
                lp.add_column(0.0, vec![(r, 1.0)]);
            }
            let sol = lp.solve()?;
            let mut weights = vec![0.0; self.mult.len()];
            for (&b, &r) in &row_of {
                weights[b] = (-sol.duals[r]).max(0.0);
            }
            let mut added = false;
            for (i, (cand, weight)) in price(&weights).into_iter().enumerate() {
                let y = sol.duals[i];
                if weight < y - 1e-9 * y.abs().max(1.0) && seen.insert((i, cand.vertices.clone())) {
                    pool.push((i, cand));
                    added = true;
                }
            }
            if !added {
                let mut flow = Flow::new();
                for (col, (_, c)) in pool.iter().enumerate() {
                    if sol.x[col] > 1e-12 {
                        flow.add_path(c.vertices.clone(), sol.x[col]);
                    }
                }
                return Ok((sol.x[eta_col], flow));
            }
        }
        Err(RoutingError::NoConvergence)
    }

    fn column_generation(&self) -> Result<(f64, Flow), RoutingError> {
        self.solve_lp(|w| {
            let mut trees = BTreeMap::new();
            self.pairs
                .iter()
                .map(|&(s, v, _)| {
                    let (dist, pred) = trees
                        .entry(s)
                        .or_insert_with(|| self.hop_bounded_tree(s, w));
                    let cand = self.extract(s, v, pred);
                    let weight = cand.bundles.iter().map(|&b| w[b]).sum::<f64>();
                    debug_assert!(weight <= dist[v] + 1e-9);
                    (cand, weight)
                })
                .collect()
        })
    }

    fn enumerated(&self, budget: usize) -> Result<(f64, Flow), RoutingError> {
        let all = self.enumerate(budget)?;
        self.solve_lp(|w| {
            all.iter()
                .map(|cands| {
                    cands
                        .iter()
                        .map(|c| (c, c.bundles.iter().map(|&b| w[b]).sum::<f64>()))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(c, x)| (c.clone(), x))
                        .expect("reachable pair has a path")
                })
                .collect()
        })
    }

    fn multiplicative_weights(&self, epsilon: f64) -> Flow {
        let eps = epsilon.clamp(1e-3, 1.0);
        let rounds = (4.0 / eps).ceil() as usize;
        let beta = 2.0 / eps;
        let mut load = vec![0.0; self.mult.len()];
        let mut flow = Flow::new();
        for _ in 0..rounds {
            for &(s, v, x) in &self.pairs {
                let peak = load
                    .iter()
                    .zip(&self.mult)
                    .map(|(l, m)| l / m)
                    .fold(1e-12, f64::max);
                let w: Vec<f64> = load
                    .iter()
                    .zip(&self.mult)
                    .map(|(l, m)| (beta * (l / m) / peak).exp() / m)
                    .collect();
                let (_, pred) = self.hop_bounded_tree(s, &w);
                let cand = self.extract(s, v, &pred);
                let share = x / rounds as f64;
                for &b in &cand.bundles {
                    load[b] += share;
                }
                flow.add_path(cand.vertices, share);
            }
        }
        flow
    }
}

/// Smallest congestion over fractional routings of `d` along paths with at
/// most `t` hops.
pub fn route_demand_exact(
    g: &MultiGraph,
    d: &Demand,
    t: usize,
    backend: RoutingBackend,
) -> Result<MinCongestion, RoutingError> {
    let inst = Instance::new(g, d, t)?;
    inst.check_reach()?;
    if inst.pairs.is_empty() {
        return Ok(MinCongestion {
            congestion: 0.0,
            witness: RoutingWitness::from_flow(Flow::new(), g, true),
        });
    }
    let flow = match backend {
        RoutingBackend::Enumerate { path_budget } => inst.enumerated(path_budget)?.1,
        RoutingBackend::ColumnGeneration => inst.column_generation()?.1,
        RoutingBackend::MultiplicativeWeights { epsilon } => inst.multiplicative_weights(epsilon),
    };
    let witness = RoutingWitness::from_flow(flow, g, backend.is_exact());
    Ok(MinCongestion {
        congestion: witness.max_congestion,
        witness,
    })
}

/// Decides whether `d` routes along `t`-hop paths with congestion at most
/// `eta`, returning either a witness flow or a certificate.
pub fn verify_routing(
    g: &MultiGraph,
    d: &Demand,
    t: usize,
    eta: f64,
    backend: RoutingBackend,
) -> Result<RoutingVerdict, RoutingError> {
    let inst = Instance::new(g, d, t)?;
    match inst.check_reach() {
        Err(RoutingError::PairTooFar {
            from,
            to,
            distance,
            hop_bound,
        }) => {
            return Ok(RoutingVerdict::Infeasible(Infeasibility::PairTooFar {
                from,
                to,
                distance,
                hop_bound,
            }))
        }
        other => other?,
    }
    let mut quick = Flow::new();
    for (c, &(_, _, x)) in inst.shortest_paths().into_iter().zip(&inst.pairs) {
        quick.add_path(c.vertices, x);
    }
    let quick = RoutingWitness::from_flow(quick, g, backend.is_exact());
    if quick.max_congestion <= eta + 1e-9 {
        return Ok(RoutingVerdict::Feasible(quick));
    }
    let best = route_demand_exact(g, d, t, backend)?;
    if best.congestion <= eta + 1e-9 {
        Ok(RoutingVerdict::Feasible(best.witness))
    } else {
        Ok(RoutingVerdict::Infeasible(Infeasibility::CongestionTooHigh {
            min_congestion: best.congestion,
            eta,
            certified: backend.is_exact(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BACKENDS: [RoutingBackend; 2] = [
        RoutingBackend::Enumerate {
            path_budget: DEFAULT_PATH_BUDGET,
        },
        RoutingBackend::ColumnGeneration,
    ];

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-7
    }

    #[test]
    fn complete_graph_direct_edges() {
        let g = MultiGraph::complete(4);
        let d = Demand::from_entries([(0, 1, 1.0), (2, 3, 1.0)]);
        for b in BACKENDS {
            let RoutingVerdict::Feasible(w) = verify_routing(&g, &d, 1, 1.0, b).unwrap() else {
                panic!("expected feasible");
            };
            assert_eq!(w.max_hop, 1);
            assert!(w.check(&g, &d, 1, 1.0).is_ok());
        }
    }

    #[test]
    fn too_far_pair() {
        let g = MultiGraph::path(3);
        let d = Demand::from_entries([(0, 2, 1.0)]);
        let v = verify_routing(&g, &d, 1, 1.0, RoutingBackend::default()).unwrap();
        assert_eq!(
            v,
            RoutingVerdict::Infeasible(Infeasibility::PairTooFar {
                from: 0,
                to: 2,
                distance: Some(2),
                hop_bound: 1
            })
        );
        assert!(matches!(
            route_demand_exact(&g, &d, 1, RoutingBackend::default()),
            Err(RoutingError::PairTooFar { .. })
        ));
    }

    #[test]
    fn four_cycle_splits_evenly() {
        let g = MultiGraph::cycle(4);
        let d = Demand::from_entries([(0, 2, 1.0), (1, 3, 1.0)]);
        for b in BACKENDS {
            let best = route_demand_exact(&g, &d, 2, b).unwrap();
            assert!(close(best.congestion, 1.0));
            let v = verify_routing(&g, &d, 2, 1.0, b).unwrap();
            let RoutingVerdict::Feasible(w) = v else {
                panic!("expected feasible")
            };
            assert!(w.check(&g, &d, 2, 1.0).is_ok());
            for (_, load) in w.flow.pair_loads() {
                assert!(close(load, 1.0));
            }
            let tight = verify_routing(&g, &d, 2, 0.9, b).unwrap();
            assert!(matches!(
                tight,
                RoutingVerdict::Infeasible(Infeasibility::CongestionTooHigh { certified: true, .. })
            ));
        }
    }

    #[test]
    fn single_and_parallel_edges() {
        let k2 = MultiGraph::complete(2);
        let d = Demand::from_entries([(0, 1, 1.0)]);
        let par = MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        for b in BACKENDS {
            assert!(close(route_demand_exact(&k2, &d, 1, b).unwrap().congestion, 1.0));
            assert!(close(route_demand_exact(&par, &d, 1, b).unwrap().congestion, 0.5));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = MultiGraph::complete(7);
        let d = Demand::from_entries([(0, 1, 1.0)]);
        let b = RoutingBackend::Enumerate { path_budget: 10 };
        assert_eq!(
            route_demand_exact(&g, &d, 4, b),
            Err(RoutingError::PathBudgetExceeded { budget: 10 })
        );
    }

    #[test]
    fn barbell_bridge_is_a_bottleneck() {
        let g = MultiGraph::barbell(5);
        let d = Demand::from_entries((0..5).map(|i| (i, 5 + i, 1.0)));
        for b in BACKENDS {
            let best = route_demand_exact(&g, &d, 6, b).unwrap();
            assert!(close(best.congestion, 5.0));
        }
    }

    #[test]
    fn backends_agree_on_hypercube_permutation() {
        let g = MultiGraph::hypercube(3);
        let perm = [7, 6, 5, 4, 3, 2, 1, 0];
        let d = Demand::permutation(&perm);
        let a = route_demand_exact(&g, &d, 3, BACKENDS[0]).unwrap().congestion;
        let b = route_demand_exact(&g, &d, 3, BACKENDS[1]).unwrap().congestion;
        assert!(close(a, b));
        let mw = route_demand_exact(&g, &d, 3, RoutingBackend::MultiplicativeWeights { epsilon: 0.1 })
            .unwrap();
        assert!(!mw.witness.exact);
        assert!(mw.congestion >= a - 1e-9);
        assert!(mw.congestion <= 2.0 * a + 1e-9);
        assert!(mw.witness.check(&g, &d, 3, mw.congestion).is_ok());
    }

    #[test]
    fn empty_demand() {
        let g = MultiGraph::new(3);
        let best = route_demand_exact(&g, &Demand::new(), 1, RoutingBackend::default()).unwrap();
        assert_eq!(best.congestion, 0.0);
    }
}
