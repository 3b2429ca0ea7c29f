//! The cut strategy: repeated expander decomposition, cover and grouping,
//! with the commodity walk measured alongside, then a final phase that
//! attaches every remaining vertex to one large cluster.

pub mod config;
pub mod players;
pub mod transcript;
pub mod walk;

pub use config::{derive_config, parse_overrides, ConfigError, Constants, GameConfig};
pub use players::{
    check_matching, player_by_name, CutPair, LazyPlayer, LocalityPlayer, MatchingPlayer,
    PlayContext, RandomPlayer, PLAYER_NAMES,
};
pub use transcript::{
    CoverRecord, CutRecord, FinalRecord, GameTranscript, GroupingRecord, IterationRecord,
    MatchingRecord, Outcome, TRANSCRIPT_VERSION,
};
pub use walk::{entropy_increase_bound, Cause, CommodityState, Link, MatchedEdge, Typicality, WalkStep};

use crate::clustering::{build_cover, decompose, ClusteringError, DecomposeParams, Decomposition};
use crate::decomp::{expander_decomposition, DecompError, DecompositionParams, SamplerConfig};
use crate::graph::{route_demand_exact, Demand, MultiGraph, RoutingBackend, RoutingError};
use crate::mixing::MixingError;
use crate::pseudo::PseudoError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error(transparent)]
    Pseudo(#[from] PseudoError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("malformed matching batch: {0}")]
    DegreeViolation(String),
    #[error("player refused the final phase: {0}")]
    PlayerRefused(String),
    #[error("no large cluster after {b_max} iterations")]
    IterationLimit { b_max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IterationOutcome {
    LargeClusterFound(Vec<usize>),
    Matched,
}

/// Sorted `V \ S` chunked into parts of size `|S|`.
pub fn final_partition(n: usize, cluster: &[usize]) -> Vec<Vec<usize>> {
    let inside: BTreeSet<usize> = cluster.iter().copied().collect();
    let outside: Vec<usize> = (0..n).filter(|v| !inside.contains(v)).collect();
    if inside.is_empty() {
        return Vec::new();
    }
    outside.chunks(inside.len()).map(<[usize]>::to_vec).collect()
}

/// Matches every part of the final partition into the lowest-index vertices
/// of `cluster`. Returns the extended graph and `k''`.
pub fn final_phase(
    graph: &MultiGraph,
    cluster: &[usize],
    player: &mut dyn MatchingPlayer,
    state: &CommodityState,
) -> Result<(MultiGraph, usize), GameError> {
    let mut sorted = cluster.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let parts = final_partition(graph.n(), &sorted);
    let cuts: Vec<CutPair> = parts
        .iter()
        .enumerate()
        .map(|(i, part)| CutPair {
            group: 0,
            blocks: (0, i + 1),
            left: sorted[..part.len()].to_vec(),
            right: part.clone(),
        })
        .collect();
    let mut out = graph.clone();
    if cuts.is_empty() {
        return Ok((out, 0));
    }
    let ctx = PlayContext { graph, state };
    let answer = player.play(&ctx, &cuts);
    if answer.len() != cuts.len() {
        return Err(GameError::PlayerRefused(format!(
            "{} matchings for {} cuts",
            answer.len(),
            cuts.len()
        )));
    }
    for (cut, edges) in cuts.iter().zip(&answer) {
        check_matching(cut, edges).map_err(GameError::PlayerRefused)?;
        for &(a, b) in edges {
            out.add_edge(a, b).map_err(|e| GameError::PlayerRefused(e.to_string()))?;
        }
    }
    Ok((out, parts.len()))
}

/// `4·max(k'', 1)·ln n / φ`.
pub fn eta_bound(n: usize, k_double_prime: usize, phi: f64) -> f64 {
    4.0 * k_double_prime.max(1) as f64 * (n.max(1) as f64).ln() / phi
}

/// Unit demands used to probe the final graph: random permutations followed
/// by bisections across a BFS order.
pub fn certification_demands(g: &MultiGraph, count: usize, rng: &mut ChaCha8Rng) -> Vec<Demand> {
    let n = g.n();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i % 2 == 0 {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            out.push(Demand::permutation(&perm));
        } else {
            let root = rng.gen_range(0..n);
            let dist = g.bfs(root);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| (dist[v].unwrap_or(usize::MAX), v));
            let half = n / 2;
            let mut d = Demand::new();
            for j in 0..half {
                let (a, b) = (order[j], order[n - 1 - j]);
                d.add(a, b, 1.0);
                d.add(b, a, 1.0);
            }
            out.push(d);
        }
    }
    out
}

/// Routes each certification demand at the smallest congestion within `t`
/// hops. `None` if some demand has a pair farther than `t` apart.
pub fn certify(g: &MultiGraph, t: usize, samples: usize, seed: u64) -> Result<Option<f64>, GameError> {
    if g.n() < 2 {
        return Ok(Some(0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for d in certification_demands(g, samples, &mut rng) {
        match route_demand_exact(g, &d, t, RoutingBackend::ColumnGeneration) {
            Ok(best) => worst = worst.max(best.congestion),
            Err(RoutingError::PairTooFar { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Some(worst))
}

/// A running game.
pub struct Game<'p> {
    pub cfg: GameConfig,
    pub graph: MultiGraph,
    pub state: CommodityState,
    pub transcript: GameTranscript,
    player: &'p mut dyn MatchingPlayer,
    steps: Vec<WalkStep>,
    cut_ever: BTreeSet<usize>,
    removal_rng: ChaCha8Rng,
    max_load: usize,
}

pub struct GameRun {
    pub graph: MultiGraph,
    pub transcript: GameTranscript,
}

#[derive(Debug)]
pub struct GameFailure {
    pub error: GameError,
    pub graph: MultiGraph,
    pub transcript: GameTranscript,
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

impl<'p> Game<'p> {
    pub fn new(cfg: GameConfig, warnings: Vec<String>, player: &'p mut dyn MatchingPlayer) -> Self {
        let n = cfg.n;
        let transcript = GameTranscript::new(cfg.clone(), player.name(), warnings);
        Self {
            graph: MultiGraph::new(n),
            state: CommodityState::new(n),
            transcript,
            player,
            steps: Vec::new(),
            cut_ever: BTreeSet::new(),
            removal_rng: ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0xA11CE)),
            max_load: 0,
            cfg,
        }
    }

    /// One pass of the loop body: cut, cover, and either report a large
    /// cluster or present the grouping's pairwise cuts and advance the walk.
    pub fn iterate(&mut self) -> Result<IterationOutcome, GameError> {
        let cfg = &self.cfg;
        let n = cfg.n;
        let index = self.transcript.iterations.len() + 1;
        let params = DecompositionParams {
            h: cfg.h,
            s: cfg.s,
            phi: cfg.phi,
            kappa: cfg.kappa,
        };
        let sampler = SamplerConfig {
            random: cfg.samples,
            adversarial: cfg.adversarial,
            seed: mix_seed(cfg.seed, index as u64),
            backend: RoutingBackend::ColumnGeneration,
        };
        let cut = expander_decomposition(&self.graph, &params, &sampler)?;
        self.cut_ever.extend(cut.edge_ids.iter().copied());
        let cut_ids: Vec<usize> = self.cut_ever.iter().copied().collect();
        let (rest, _) = self.graph.without_edges(&cut_ids);
        let cover = build_cover(&rest, cfg.h_sep, cfg.h_diam, cfg.load_max)?;
        let largest = cover.largest_cluster();
        let k_prime = cfg.k_prime_for(cover.load, cover.width());
        if let Some(big) = &largest {
            if (big.size() as u128) * (k_prime as u128) >= n as u128 {
                return Ok(IterationOutcome::LargeClusterFound(big.vertices.clone()));
            }
        }
        if index > cfg.b_max {
            return Err(GameError::IterationLimit { b_max: cfg.b_max });
        }
        let decomposition = decompose(
            &cover,
            &DecomposeParams {
                c: cfg.c,
                c_prime: cfg.c_prime,
                k: cfg.k,
                k_prime,
            },
        )?;
        let grouping = match &decomposition {
            Decomposition::Grouping(g) => Some(g),
            Decomposition::Empty { .. } => None,
        };

        let mut cuts = Vec::new();
        if let Some(gr) = grouping {
            for (j, group) in gr.groups.iter().enumerate() {
                for i1 in 0..group.len() {
                    for i2 in i1 + 1..group.len() {
                        let mut left = group[i1].clone();
                        let mut right = group[i2].clone();
                        left.sort_unstable();
                        right.sort_unstable();
                        cuts.push(CutPair {
                            group: j,
                            blocks: (i1, i2),
                            left,
                            right,
                        });
                    }
                }
            }
        }

        let answer = {
            let ctx = PlayContext {
                graph: &self.graph,
                state: &self.state,
            };
            self.player.play(&ctx, &cuts)
        };
        if answer.len() != cuts.len() {
            return Err(GameError::DegreeViolation(format!(
                "{} matchings for {} cuts",
                answer.len(),
                cuts.len()
            )));
        }
        for (c, edges) in cuts.iter().zip(&answer) {
            check_matching(c, edges).map_err(GameError::DegreeViolation)?;
        }
        let total: usize = answer.iter().map(Vec::len).sum();
        let removed_count = (cfg.removal * total as f64).floor() as usize;
        let removed: BTreeSet<usize> =
            rand::seq::index::sample(&mut self.removal_rng, total, removed_count.min(total))
                .into_iter()
                .collect();

        let step = match grouping {
            Some(gr) => {
                let mut per_group: Vec<Vec<(usize, usize, Link)>> = vec![Vec::new(); gr.g()];
                let mut flat = 0;
                for (c, edges) in cuts.iter().zip(&answer) {
                    for &(a, b) in edges {
                        let link = if removed.contains(&flat) {
                            Link::Removed
                        } else {
                            Link::Kept(self.graph.add_edge(a, b).map_err(|e| {
                                GameError::DegreeViolation(e.to_string())
                            })?)
                        };
                        per_group[c.group].push((a, b, link));
                        flat += 1;
                    }
                }
                WalkStep::build(gr, cfg.k, &per_group)?
            }
            None => WalkStep::idle(n, cfg.k),
        };

        self.state.replay_split(&self.steps, &self.cut_ever)?;
        self.state.leak_unloaded(&step);
        let typicality = self.state.measure_typicality();
        let locality_holds = self.state.typical_is_local(&step);
        let entropy_before = self.state.entropy();
        self.state.step(&step, &self.cut_ever)?;
        let entropy_after = self.state.entropy();

        let (entropy_bound, bound_holds) = match grouping {
            Some(_) if locality_holds => {
                let b = entropy_increase_bound(typicality.alpha, n, cfg.k, step.max_load());
                (Some(b), Some(entropy_after >= entropy_before + b - 1e-9))
            }
            _ => (None, None),
        };
        let grouping_record = match grouping {
            Some(gr) => GroupingRecord {
                g: gr.g(),
                k: gr.k(),
                block_size: gr.block_size,
                load: gr.load,
                dropped: gr.dropped.len(),
            },
            None => GroupingRecord {
                g: 0,
                k: cfg.k,
                block_size: 0,
                load: 0,
                dropped: decomposition.dropped().len(),
            },
        };
        self.max_load = self.max_load.max(grouping_record.load);
        let record = IterationRecord {
            index,
            cut: CutRecord {
                size: cut.size(),
                budget: params.budget(n),
                edges: cut.edges.clone(),
            },
            cover: CoverRecord {
                width: cover.width(),
                load: cover.load,
                max_cluster: largest.map_or(0, |c| c.size()),
                k_prime,
            },
            grouping: grouping_record,
            matching: MatchingRecord {
                cuts: cuts.len(),
                edges: total,
                removed: removed.len(),
            },
            cuts_presented: cuts.len(),
            entropy_before,
            entropy_after,
            typicality_ok: typicality.alpha >= 0.5,
            typicality,
            locality_holds,
            entropy_bound,
            bound_holds,
            stochastic_error: self.state.stochastic_error(),
            split_error: self.state.split_error(),
        };
        self.transcript.iterations.push(record);
        self.steps.push(step);
        Ok(IterationOutcome::Matched)
    }

    /// Final phase and certification of the final graph.
    pub fn finish(&mut self, cluster: &[usize]) -> Result<(), GameError> {
        let (g_final, kpp) = final_phase(&self.graph, cluster, &mut *self.player, &self.state)?;
        self.graph = g_final;
        let cfg = &self.cfg;
        let n = cfg.n;
        let b_used = self.transcript.iterations.len();
        let k_prime = self.transcript.iterations.last().map_or_else(
            || cfg.k_prime_for(1, 1),
            |r| r.cover.k_prime,
        );
        let diameter = self.graph.diameter();
        let max_congestion = certify(
            &self.graph,
            cfg.t,
            cfg.certify_samples,
            mix_seed(cfg.seed, 0xF1A1),
        )?;
        let bound_applicable = self.transcript.iterations.iter().all(|r| r.typicality_ok);
        let fin = FinalRecord {
            cluster_size: cluster.len(),
            k_prime,
            k_double_prime: kpp,
            delta_measured: self.graph.max_degree(),
            delta_bound: b_used * self.max_load * (cfg.k - 1) + kpp,
            diameter,
            t: cfg.t,
            max_congestion,
            eta_bound: eta_bound(n, kpp, cfg.phi),
            samples: cfg.certify_samples,
            r_total: 0,
            b_used,
            b_max: cfg.b_max,
            bound_applicable,
            edges: self.graph.m(),
        };
        self.transcript.final_phase = Some(fin);
        let total = self.transcript.cuts_total();
        if let Some(f) = self.transcript.final_phase.as_mut() {
            f.r_total = total;
        }
        self.transcript.outcome = Outcome::Completed;
        Ok(())
    }

    fn drive(&mut self) -> Result<(), GameError> {
        loop {
            if let IterationOutcome::LargeClusterFound(cluster) = self.iterate()? {
                return self.finish(&cluster);
            }
        }
    }
}

/// Plays the whole game. On failure the transcript up to that point comes
/// back with the error.
pub fn run_game(
    cfg: &GameConfig,
    warnings: Vec<String>,
    player: &mut dyn MatchingPlayer,
) -> Result<GameRun, Box<GameFailure>> {
    let mut game = Game::new(cfg.clone(), warnings, player);
    match game.drive() {
        Ok(()) => Ok(GameRun {
                graph: game.graph,
                transcript: game.transcript,
            }),
        Err(error) => {
            game.transcript.outcome = match &error {
                GameError::IterationLimit { .. } => Outcome::IterationLimit,
                e => Outcome::Failed(e.to_string()),
            };
            Err(Box::new(GameFailure {
                error,
                graph: game.graph,
                transcript: game.transcript,
            }))
        }
    }
}
