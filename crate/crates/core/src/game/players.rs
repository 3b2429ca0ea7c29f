//! Concrete matching players.

use super::walk::CommodityState;
use crate::graph::MultiGraph;
use crate::pseudo::entropy_term;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A cut presented to the player: match every vertex of `left` to a
/// distinct vertex of `right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPair {
    pub group: usize,
    pub blocks: (usize, usize),
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// What the player may look at.
pub struct PlayContext<'a> {
    pub graph: &'a MultiGraph,
    pub state: &'a CommodityState,
}

pub trait MatchingPlayer {
    fn name(&self) -> &str;

    /// One edge list per cut, each edge as `(left vertex, right vertex)`.
    fn play(&mut self, ctx: &PlayContext<'_>, cuts: &[CutPair]) -> Vec<Vec<(usize, usize)>>;
}

/// Checks that `edges` is a perfect matching between the two sides.
pub fn check_matching(cut: &CutPair, edges: &[(usize, usize)]) -> Result<(), String> {
    if cut.left.len() != cut.right.len() {
        return Err(format!(
            "cut sides differ in size: {} vs {}",
            cut.left.len(),
            cut.right.len()
        ));
    }
    if edges.len() != cut.left.len() {
        return Err(format!(
            "expected {} edges, got {}",
            cut.left.len(),
            edges.len()
        ));
    }
    let mut seen_l = std::collections::BTreeSet::new();
    let mut seen_r = std::collections::BTreeSet::new();
    for &(a, b) in edges {
        if cut.left.binary_search(&a).is_err() || cut.right.binary_search(&b).is_err() {
            return Err(format!("edge ({a}, {b}) does not cross the cut"));
        }
        if !seen_l.insert(a) || !seen_r.insert(b) {
            return Err(format!("edge ({a}, {b}) reuses a matched vertex"));
        }
    }
    Ok(())
}

/// Uniformly random perfect matchings from a seeded stream.
pub struct RandomPlayer {
    rng: ChaCha8Rng,
}

impl RandomPlayer {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl MatchingPlayer for RandomPlayer {
    fn name(&self) -> &str {
        "random"
    }

    fn play(&mut self, _: &PlayContext<'_>, cuts: &[CutPair]) -> Vec<Vec<(usize, usize)>> {
        cuts.iter()
            .map(|cut| {
                let mut right = cut.right.clone();
                right.shuffle(&mut self.rng);
                cut.left.iter().copied().zip(right).collect()
            })
            .collect()
    }
}

/// Greedily pairs the closest vertices in the current graph.
pub struct LocalityPlayer;

impl MatchingPlayer for LocalityPlayer {
    fn name(&self) -> &str {
        "locality"
    }

    fn play(&mut self, ctx: &PlayContext<'_>, cuts: &[CutPair]) -> Vec<Vec<(usize, usize)>> {
        cuts.iter()
            .map(|cut| {
                let mut candidates = Vec::with_capacity(cut.left.len() * cut.right.len());
                for &a in &cut.left {
                    let dist = ctx.graph.bfs(a);
                    for &b in &cut.right {
                        candidates.push((dist[b].unwrap_or(usize::MAX), a, b));
                    }
                }
                candidates.sort_unstable();
                greedy(candidates.into_iter().map(|(_, a, b)| (a, b)))
            })
            .collect()
    }
}

/// Greedily pairs vertices whose commodity rows overlap most, so that
/// mixing them gains the least entropy.
pub struct LazyPlayer;

fn merge_gain(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| entropy_term(a + b) - entropy_term(a) - entropy_term(b))
        .sum()
}

impl MatchingPlayer for LazyPlayer {
    fn name(&self) -> &str {
        "lazy"
    }

    fn play(&mut self, ctx: &PlayContext<'_>, cuts: &[CutPair]) -> Vec<Vec<(usize, usize)>> {
        cuts.iter()
            .map(|cut| {
                let mut candidates = Vec::with_capacity(cut.left.len() * cut.right.len());
                for &a in &cut.left {
                    for &b in &cut.right {
                        let gain = merge_gain(ctx.state.row(a), ctx.state.row(b));
                        candidates.push((gain, a, b));
                    }
                }
                candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
                greedy(candidates.into_iter().map(|(_, a, b)| (a, b)))
            })
            .collect()
    }
}

fn greedy(order: impl Iterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
    let mut used_l = std::collections::BTreeSet::new();
    let mut used_r = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (a, b) in order {
        if !used_l.contains(&a) && !used_r.contains(&b) {
            used_l.insert(a);
            used_r.insert(b);
            out.push((a, b));
        }
    }
    out.sort_unstable();
    out
}

pub const PLAYER_NAMES: &[&str] = &["random", "locality", "lazy"];

pub fn player_by_name(name: &str, seed: u64) -> Option<Box<dyn MatchingPlayer>> {
    match name {
        "random" => Some(Box::new(RandomPlayer::new(seed))),
        "locality" => Some(Box::new(LocalityPlayer)),
        "lazy" => Some(Box::new(LazyPlayer)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_parts(n: usize) -> (MultiGraph, CommodityState) {
        (MultiGraph::new(n), CommodityState::new(n))
    }

    #[test]
    fn single_pair_cut() {
        let (g, st) = ctx_parts(2);
        let ctx = PlayContext { graph: &g, state: &st };
        let cut = CutPair {
            group: 0,
            blocks: (0, 1),
            left: vec![0],
            right: vec![1],
        };
        for name in PLAYER_NAMES {
            let mut p = player_by_name(name, 3).unwrap();
            assert_eq!(p.play(&ctx, std::slice::from_ref(&cut)), vec![vec![(0, 1)]]);
        }
    }

    #[test]
    fn random_is_seeded() {
        let (g, st) = ctx_parts(20);
        let ctx = PlayContext { graph: &g, state: &st };
        let cut = CutPair {
            group: 0,
            blocks: (0, 1),
            left: (0..10).collect(),
            right: (10..20).collect(),
        };
        let a = RandomPlayer::new(9).play(&ctx, std::slice::from_ref(&cut));
        let b = RandomPlayer::new(9).play(&ctx, std::slice::from_ref(&cut));
        assert_eq!(a, b);
        check_matching(&cut, &a[0]).unwrap();
        check_matching(&cut, &LocalityPlayer.play(&ctx, std::slice::from_ref(&cut))[0]).unwrap();
        check_matching(&cut, &LazyPlayer.play(&ctx, std::slice::from_ref(&cut))[0]).unwrap();
    }

    #[test]
    fn locality_prefers_near_vertices() {
        let g = MultiGraph::from_edges(4, &[(0, 3), (1, 2)]).unwrap();
        let st = CommodityState::new(4);
        let ctx = PlayContext { graph: &g, state: &st };
        let cut = CutPair {
            group: 0,
            blocks: (0, 1),
            left: vec![0, 1],
            right: vec![2, 3],
        };
        assert_eq!(LocalityPlayer.play(&ctx, &[cut]), vec![vec![(0, 3), (1, 2)]]);
    }

    #[test]
    fn malformed_matchings_rejected() {
        let cut = CutPair {
            group: 0,
            blocks: (0, 1),
            left: vec![0, 1],
            right: vec![2, 3],
        };
        assert!(check_matching(&cut, &[(0, 2)]).is_err());
        assert!(check_matching(&cut, &[(0, 2), (1, 2)]).is_err());
        assert!(check_matching(&cut, &[(0, 1), (2, 3)]).is_err());
        assert!(check_matching(&cut, &[(0, 3), (1, 2)]).is_ok());
    }
}
