//! Cut-matching game for constant-hop expanders.
//!
//! The crate is organized bottom-up:
//!
//! - [`pseudo`]: pseudo-distributions, entropy, splitting and merging.
//! - [`mixing`]: two-step mixing processes with stable entropy.
//! - [`graph`]: multigraphs, demands, flows and hop-constrained routing.
//! - [`clustering`]: well-separated clusterings and their decomposition into
//!   groups of equal-size blocks.
//! - [`decomp`]: a verification-driven hop-constrained expander decomposition.
//! - [`game`]: the cut strategy, matching players, commodity walk and
//!   transcripts.
//! - [`harness`]: integral max-flow, the flow-based sparse-cut reduction,
//!   the idealized warm-up and file formats used by the CLI.

pub mod clustering;
pub mod decomp;
pub mod game;
pub mod graph;
pub mod harness;
pub mod mixing;
pub mod pseudo;
