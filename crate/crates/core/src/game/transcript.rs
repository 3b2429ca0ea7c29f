//! Serializable game transcript.

use super::config::GameConfig;
use super::walk::Typicality;
use crate::graph::Pair;
use serde::{Deserialize, Serialize};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub size: usize,
    pub budget: usize,
    pub edges: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverRecord {
    pub width: usize,
    pub load: usize,
    pub max_cluster: usize,
    pub k_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingRecord {
    pub g: usize,
    pub k: usize,
    pub block_size: usize,
    pub load: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingRecord {
    pub cuts: usize,
    pub edges: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub cut: CutRecord,
    pub cover: CoverRecord,
    pub grouping: GroupingRecord,
    pub matching: MatchingRecord,
    pub cuts_presented: usize,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub typicality: Typicality,
    /// Typical mass of every commodity sits in at most one block per group.
    pub locality_holds: bool,
    /// The lower bound on the entropy increase, when its hypotheses held.
    pub entropy_bound: Option<f64>,
    pub bound_holds: Option<bool>,
    /// At least half of the commodities were 1/3-typical.
    pub typicality_ok: bool,
    pub stochastic_error: f64,
    pub split_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRecord {
    pub cluster_size: usize,
    pub k_prime: u64,
    pub k_double_prime: usize,
    pub delta_measured: usize,
    pub delta_bound: usize,
    pub diameter: Option<usize>,
    pub t: usize,
    /// Largest congestion over the sampled demands; absent if some sample
    /// could not be routed within `t` hops.
    pub max_congestion: Option<f64>,
    pub eta_bound: f64,
    pub samples: usize,
    pub r_total: usize,
    pub b_used: usize,
    pub b_max: usize,
    /// Every iteration met the typicality condition.
    pub bound_applicable: bool,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail")]
pub enum Outcome {
    Running,
    Completed,
    IterationLimit,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub version: u32,
    pub player: String,
    pub config: GameConfig,
    pub warnings: Vec<String>,
    pub iterations: Vec<IterationRecord>,
    pub final_phase: Option<FinalRecord>,
    pub outcome: Outcome,
}

impl GameTranscript {
    pub fn new(config: GameConfig, player: &str, warnings: Vec<String>) -> Self {
        Self {
            version: TRANSCRIPT_VERSION,
            player: player.to_string(),
            config,
            warnings,
            iterations: Vec::new(),
            final_phase: None,
            outcome: Outcome::Running,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Total number of cuts presented, main and final phase.
    pub fn cuts_total(&self) -> usize {
        self.iterations.iter().map(|r| r.cuts_presented).sum::<usize>()
            + self.final_phase.as_ref().map_or(0, |f| f.k_double_prime)
    }
}
