//! The commodity walk on one batch of matchings, with typical/leaked
//! bookkeeping.
//!
//! Within group `j` every member `v` has the closed neighborhood
//! `Γ_j(v) = {v} ∪ {partners of v in the other k-1 blocks}`, so
//! `|Γ_j(v)| = k`. Mixers are these neighborhoods and `w(v) = load(v)·k`.

use super::GameError;
use crate::clustering::Grouping;
use crate::mixing::{mix, MixerSystem};
use crate::pseudo::{entropy_term, PseudoDistribution};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// How a step of the walk moves between two vertices of a mixer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    Stay,
    /// A matching edge kept in the graph, by edge id.
    Kept(usize),
    /// A matching edge removed by the player.
    Removed,
}

/// Leakage causes, in the order used by [`CommodityState::leaked`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cause {
    CutEdge = 0,
    LoadZero = 1,
    RemovedEdge = 2,
}

/// One iteration's walk structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStep {
    pub n: usize,
    pub k: usize,
    pub load: Vec<u32>,
    /// `blocks[j]` lists the blocks of group `j`.
    pub blocks: Vec<Vec<Vec<usize>>>,
    /// `neighbors[j][v]` is `Γ_j(v)` with links, empty for non-members.
    pub neighbors: Vec<Vec<Vec<(usize, Link)>>>,
}

/// One matched edge of a block pair: endpoints and link.
pub type MatchedEdge = (usize, usize, Link);

impl WalkStep {
    /// A step in which nothing moves.
    pub fn idle(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            load: vec![0; n],
            blocks: Vec::new(),
            neighbors: Vec::new(),
        }
    }

    /// Builds the step from a grouping and, per group, the matched edges of
    /// every block pair. Fails if some member does not end up with exactly
    /// `k` mixer neighbors.
    pub fn build(grouping: &Grouping, k: usize, edges: &[Vec<MatchedEdge>]) -> Result<Self, GameError> {
        let n = grouping.n;
        let mut load = vec![0u32; n];
        let mut neighbors = Vec::with_capacity(grouping.g());
        for (j, group) in grouping.groups.iter().enumerate() {
            let mut nb: Vec<Vec<(usize, Link)>> = vec![Vec::new(); n];
            for block in group {
                for &v in block {
                    nb[v].push((v, Link::Stay));
                    load[v] += 1;
                }
            }
            for &(a, b, link) in &edges[j] {
                if nb[a].is_empty() || nb[b].is_empty() {
                    return Err(GameError::DegreeViolation(format!(
                        "edge ({a}, {b}) leaves the blocks of group {j}"
                    )));
                }
                nb[a].push((b, link));
                nb[b].push((a, link));
            }
            for (v, list) in nb.iter_mut().enumerate() {
                if !list.is_empty() && list.len() != k {
                    return Err(GameError::DegreeViolation(format!(
                        "vertex {v} has degree {} in group {j}, expected {k}",
                        list.len()
                    )));
                }
                list.sort_unstable_by_key(|&(u, _)| u);
            }
            neighbors.push(nb);
        }
        Ok(Self {
            n,
            k,
            load,
            blocks: grouping.groups.clone(),
            neighbors,
        })
    }

    /// `load_M`, the largest per-vertex load.
    pub fn max_load(&self) -> u32 {
        self.load.iter().copied().max().unwrap_or(0)
    }

    fn gamma(&self, v: usize) -> f64 {
        1.0 / (self.load[v] as f64 * self.k as f64)
    }

    /// `γ_{W(j,u)}` for every member `u` of group `j`.
    fn gamma_mixers(&self) -> Vec<Vec<f64>> {
        self.neighbors
            .iter()
            .map(|nb| {
                nb.iter()
                    .map(|list| list.iter().map(|&(x, _)| self.gamma(x)).sum())
                    .collect()
            })
            .collect()
    }

    /// The mixer system of this step with singletons for load-0 vertices.
    pub fn mixer_system(&self) -> MixerSystem {
        let mixers = self
            .neighbors
            .iter()
            .flat_map(|nb| nb.iter().filter(|l| !l.is_empty()))
            .map(|list| list.iter().map(|&(x, _)| x).collect())
            .collect();
        MixerSystem::from_mixers(self.n, mixers)
            .expect("neighborhoods are valid mixers")
            .cover_with_singletons()
    }

    /// Every two-step transition `(v, u, v', coefficient, link1, link2)`
    /// with `q_2 = coefficient · p(v)`.
    pub fn transitions(&self) -> Vec<(usize, usize, usize, f64, Link, Link)> {
        let gw = self.gamma_mixers();
        let mut out = Vec::new();
        for (j, nb) in self.neighbors.iter().enumerate() {
            for v in 0..self.n {
                for &(u, l1) in &nb[v] {
                    for &(v2, l2) in &nb[u] {
                        let coef = 1.0 / self.load[v] as f64 / self.k as f64 * self.gamma(v2) / gw[j][u];
                        out.push((v, u, v2, coef, l1, l2));
                    }
                }
            }
        }
        out
    }
}

/// `n × n` commodity matrix (row = vertex, column = commodity) with its
/// typical part and three cause-specific leaked parts.
#[derive(Debug, Clone, PartialEq)]
pub struct CommodityState {
    pub n: usize,
    pub p: Vec<f64>,
    pub typical: Vec<f64>,
    pub leaked: [Vec<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Typicality {
    /// Fraction of commodities with leakage at most 1/3.
    pub alpha: f64,
    pub ell_max: f64,
    pub ell_mean: f64,
    /// Mean leaked mass per commodity, by cause.
    pub by_cause: [f64; 3],
    pub per_commodity: Vec<f64>,
}

fn usable(link: Link, cut: &BTreeSet<usize>) -> Result<(), Cause> {
    match link {
        Link::Stay => Ok(()),
        Link::Kept(id) if cut.contains(&id) => Err(Cause::CutEdge),
        Link::Kept(_) => Ok(()),
        Link::Removed => Err(Cause::RemovedEdge),
    }
}

fn axpy(dst: &mut [f64], a: f64, src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += a * s;
    }
}

impl CommodityState {
    /// Every commodity at its own vertex, all typical.
    pub fn new(n: usize) -> Self {
        let mut p = vec![0.0; n * n];
        for v in 0..n {
            p[v * n + v] = 1.0;
        }
        Self {
            n,
            typical: p.clone(),
            p,
            leaked: [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]],
        }
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.p[v * self.n..(v + 1) * self.n]
    }

    pub fn column(&self, nu: usize) -> Vec<f64> {
        (0..self.n).map(|v| self.p[v * self.n + nu]).collect()
    }

    /// `H(P)`, the sum of all commodity entropies.
    pub fn entropy(&self) -> f64 {
        self.p.iter().map(|&x| entropy_term(x)).sum()
    }

    /// Largest deviation of a row or column sum from 1.
    pub fn stochastic_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let row: f64 = self.p[i * n..(i + 1) * n].iter().sum();
            let col: f64 = (0..n).map(|v| self.p[v * n + i]).sum();
            worst = worst.max((row - 1.0).abs()).max((col - 1.0).abs());
        }
        worst
    }

    /// Largest entrywise deviation of `P` from typical plus leaked.
    pub fn split_error(&self) -> f64 {
        (0..self.p.len())
            .map(|i| {
                let sum = self.typical[i] + self.leaked.iter().map(|l| l[i]).sum::<f64>();
                (self.p[i] - sum).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `ℓ_ν` for every commodity.
    pub fn leakage(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|nu| {
                (0..n)
                    .map(|v| self.leaked.iter().map(|l| l[v * n + nu]).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    pub fn measure_typicality(&self) -> Typicality {
        let n = self.n;
        let ell = self.leakage();
        let good = ell.iter().filter(|&&x| x <= 1.0 / 3.0 + 1e-12).count();
        let mut by_cause = [0.0; 3];
        for (c, l) in self.leaked.iter().enumerate() {
            by_cause[c] = l.iter().sum::<f64>() / n.max(1) as f64;
        }
        Typicality {
            alpha: if n == 0 { 1.0 } else { good as f64 / n as f64 },
            ell_max: ell.iter().copied().fold(0.0, f64::max),
            ell_mean: ell.iter().sum::<f64>() / n.max(1) as f64,
            by_cause,
            per_commodity: ell,
        }
    }

    /// Moves typical mass sitting on load-0 vertices into the leaked part.
    pub fn leak_unloaded(&mut self, step: &WalkStep) {
        let n = self.n;
        for v in (0..n).filter(|&v| step.load[v] == 0) {
            for nu in 0..n {
                let x = std::mem::take(&mut self.typical[v * n + nu]);
                self.leaked[Cause::LoadZero as usize][v * n + nu] += x;
            }
        }
    }

    /// Whether, for every commodity and group, typical mass inside that
    /// group's blocks lies in at most one block.
    pub fn typical_is_local(&self, step: &WalkStep) -> bool {
        let n = self.n;
        for group in &step.blocks {
            for nu in 0..n {
                let holding = group
                    .iter()
                    .filter(|b| b.iter().any(|&v| self.typical[v * n + nu] > 1e-15))
                    .count();
                if holding > 1 {
                    return false;
                }
            }
        }
        true
    }

    /// Advances `P` through the mixing process of `step` and the typical and
    /// leaked parts through the same transitions. Call [`leak_unloaded`]
    /// first.
    ///
    /// [`leak_unloaded`]: Self::leak_unloaded
    pub fn step(&mut self, step: &WalkStep, cut: &BTreeSet<usize>) -> Result<(), GameError> {
        let n = self.n;
        let sys = step.mixer_system();
        let mut next = vec![0.0; n * n];
        for nu in 0..n {
            let col = PseudoDistribution::new(self.column(nu))?;
            let out = mix(&col, &sys)?;
            for (v, &x) in out.values().iter().enumerate() {
                next[v * n + nu] = x;
            }
        }
        let mut typical = vec![0.0; n * n];
        let mut leaked = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
        for v in (0..n).filter(|&v| step.load[v] == 0) {
            let r = v * n..(v + 1) * n;
            typical[r.clone()].copy_from_slice(&self.typical[r.clone()]);
            for c in 0..3 {
                leaked[c][r.clone()].copy_from_slice(&self.leaked[c][r.clone()]);
            }
        }
        for (v, _, v2, coef, l1, l2) in step.transitions() {
            let src = v * n..(v + 1) * n;
            let dst = v2 * n..(v2 + 1) * n;
            for c in 0..3 {
                axpy(&mut leaked[c][dst.clone()], coef, &self.leaked[c][src.clone()]);
            }
            match usable(l1, cut).and_then(|_| usable(l2, cut)) {
                Ok(()) => axpy(&mut typical[dst], coef, &self.typical[src]),
                Err(cause) => axpy(&mut leaked[cause as usize][dst], coef, &self.typical[src]),
            }
        }
        self.p = next;
        self.typical = typical;
        self.leaked = leaked;
        Ok(())
    }

    /// Recomputes the typical/leaked split of `p` by replaying `steps` from
    /// the identity with the current cut set.
    pub fn replay_split(&mut self, steps: &[WalkStep], cut: &BTreeSet<usize>) -> Result<(), GameError> {
        let mut fresh = CommodityState::new(self.n);
        for s in steps {
            fresh.leak_unloaded(s);
            fresh.step(s, cut)?;
        }
        self.typical = fresh.typical;
        self.leaked = fresh.leaked;
        Ok(())
    }
}

/// `α·n·[(1-ℓ)·ln(k²/load) - ln(load·k + 1)]` with `ℓ = 1/3`.
pub fn entropy_increase_bound(alpha: f64, n: usize, k: usize, load: u32) -> f64 {
    let (k, load) = (k as f64, load.max(1) as f64);
    alpha * n as f64 * ((2.0 / 3.0) * (k * k / load).ln() - (load * k + 1.0).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_groups_four_vertices() -> WalkStep {
        // groups {0},{1} and {2},{3}, each with k = 2 singleton blocks
        let grouping = Grouping {
            n: 4,
            groups: vec![vec![vec![0], vec![1]], vec![vec![2], vec![3]]],
            block_size: 1,
            separation_bound: 1,
            load: 1,
            dropped: vec![],
        };
        let edges = vec![vec![(0, 1, Link::Kept(0))], vec![(2, 3, Link::Kept(1))]];
        WalkStep::build(&grouping, 2, &edges).unwrap()
    }

    #[test]
    fn hand_evaluated_step() {
        let step = two_groups_four_vertices();
        let mut st = CommodityState::new(4);
        st.leak_unloaded(&step);
        st.step(&step, &BTreeSet::new()).unwrap();
        // q0 = 1, q1 = 1/2 to each of {0, 1}; γ = 1/2 everywhere, γ_W = 1,
        // so q2 = 1/4 along each of the four paths: p' = [1/2, 1/2, 0, 0]
        let c0 = st.column(0);
        assert!((c0[0] - 0.5).abs() < 1e-15 && (c0[1] - 0.5).abs() < 1e-15);
        assert_eq!(c0[2], 0.0);
        assert!(st.stochastic_error() < 1e-12);
        assert!(st.split_error() < 1e-15);
        let gain = st.entropy() - 0.0;
        assert!((gain - 4.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_keeps_matrix() {
        let mut st = CommodityState::new(3);
        let step = WalkStep::idle(3, 2);
        let before = st.p.clone();
        st.leak_unloaded(&step);
        st.step(&step, &BTreeSet::new()).unwrap();
        assert_eq!(st.p, before);
        // every commodity sat on a load-0 vertex
        assert_eq!(st.measure_typicality().alpha, 0.0);
        assert!(st.split_error() < 1e-15);
    }

    #[test]
    fn fresh_state_is_fully_typical() {
        let st = CommodityState::new(5);
        let t = st.measure_typicality();
        assert_eq!(t.alpha, 1.0);
        assert!(t.per_commodity.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn one_leaked_commodity() {
        let mut st = CommodityState::new(4);
        st.typical[0] = 0.0;
        st.leaked[0][0] = 1.0;
        assert_eq!(st.measure_typicality().alpha, 0.75);
    }

    #[test]
    fn cut_and_removed_edges_leak() {
        let step = two_groups_four_vertices();
        let cut: BTreeSet<usize> = [0].into();
        let mut st = CommodityState::new(4);
        st.leak_unloaded(&step);
        st.step(&step, &cut).unwrap();
        let ell = st.leakage();
        // commodity 0 keeps only the 0→0→0 path typical (1/4)
        assert!((ell[0] - 0.75).abs() < 1e-12);
        assert_eq!(ell[2], 0.0);
        assert!(st.split_error() < 1e-15);

        let grouping = Grouping {
            n: 2,
            groups: vec![vec![vec![0], vec![1]]],
            block_size: 1,
            separation_bound: 1,
            load: 1,
            dropped: vec![],
        };
        let step = WalkStep::build(&grouping, 2, &[vec![(0, 1, Link::Removed)]]).unwrap();
        let mut st = CommodityState::new(2);
        st.leak_unloaded(&step);
        st.step(&step, &BTreeSet::new()).unwrap();
        let t = st.measure_typicality();
        assert!((t.by_cause[Cause::RemovedEdge as usize] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn degree_violations_detected() {
        let grouping = Grouping {
            n: 4,
            groups: vec![vec![vec![0, 1], vec![2, 3]]],
            block_size: 2,
            separation_bound: 1,
            load: 1,
            dropped: vec![],
        };
        let partial = vec![vec![(0, 2, Link::Kept(0))]];
        assert!(matches!(
            WalkStep::build(&grouping, 2, &partial),
            Err(GameError::DegreeViolation(_))
        ));
    }

    #[test]
    fn replay_matches_forward_run() {
        let step = two_groups_four_vertices();
        let mut st = CommodityState::new(4);
        for _ in 0..3 {
            st.leak_unloaded(&step);
            st.step(&step, &BTreeSet::new()).unwrap();
        }
        let mut replayed = st.clone();
        replayed.replay_split(&vec![step; 3], &BTreeSet::new()).unwrap();
        assert_eq!(replayed, st);
    }

    #[test]
    fn bound_formula() {
        let b = entropy_increase_bound(1.0, 10, 4, 1);
        let expect = 10.0 * ((2.0 / 3.0) * 16f64.ln() - 5f64.ln());
        assert!((b - expect).abs() < 1e-12);
    }
}
