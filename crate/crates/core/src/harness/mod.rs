//! Experiment plumbing: integral max-flow, the flow-based reduction from
//! cut strategies to sparse cuts or embeddings, the idealized warm-up, and
//! transcript verification.

pub mod krv;
pub mod maxflow;
pub mod verify;
pub mod warmup;

pub use krv::{
    default_rounds, krv_reduce, recount_congestion, BitBisection, CutStrategy, EmbeddedEdge,
    Embedding, EmbeddingOrCut, KrvReport, RandomProjection, SparseCut,
};
pub use maxflow::FlowNetwork;
pub use verify::{verify_transcript, Violation};
pub use warmup::{digit_step, digits_of, run_warmup, WarmupIteration, WarmupReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("cut strategy gave up in round {round}")]
    StrategyExhausted { round: usize },
    #[error("invalid bisection: {0}")]
    InvalidBisection(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal error: {0}")]
    Internal(String),
}
