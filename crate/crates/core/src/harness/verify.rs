//! Re-checks a transcript against its final graph.

use crate::game::{entropy_increase_bound, eta_bound, GameTranscript, Outcome, TRANSCRIPT_VERSION};
use crate::graph::MultiGraph;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

/// Every violated invariant, empty when the pair is consistent.
pub fn verify_transcript(t: &GameTranscript, g: &MultiGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |invariant: &'static str, detail: String| out.push(Violation { invariant, detail });
    let cfg = &t.config;
    if t.version != TRANSCRIPT_VERSION {
        fail("version", format!("transcript version {} is not {TRANSCRIPT_VERSION}", t.version));
    }
    if t.outcome != Outcome::Completed {
        fail("outcome", format!("run did not complete: {:?}", t.outcome));
    }
    if g.n() != cfg.n {
        fail("vertex-count", format!("graph has {} vertices, config says {}", g.n(), cfg.n));
        return out;
    }
    let mut max_load = 0;
    for r in &t.iterations {
        let i = r.index;
        if r.stochastic_error > 1e-9 {
            fail("double-stochastic", format!("iteration {i}: error {}", r.stochastic_error));
        }
        if r.split_error > 1e-9 {
            fail("typical-plus-leaked", format!("iteration {i}: error {}", r.split_error));
        }
        if r.entropy_after < r.entropy_before - 1e-6 {
            fail(
                "entropy-monotone",
                format!("iteration {i}: {} -> {}", r.entropy_before, r.entropy_after),
            );
        }
        if r.typicality_ok != (r.typicality.alpha >= 0.5) {
            fail("typicality-flag", format!("iteration {i}: alpha {}", r.typicality.alpha));
        }
        let k = r.grouping.k;
        if r.cuts_presented != r.grouping.g * k * k.saturating_sub(1) / 2 {
            fail("cuts-presented", format!("iteration {i}: {} cuts", r.cuts_presented));
        }
        if r.cut.size > r.cut.budget {
            fail("cut-budget", format!("iteration {i}: {} > {}", r.cut.size, r.cut.budget));
        }
        if let Some(b) = r.entropy_bound {
            let expect = entropy_increase_bound(r.typicality.alpha, cfg.n, cfg.k, r.grouping.load as u32);
            if (b - expect).abs() > 1e-9 * expect.abs().max(1.0) {
                fail("entropy-bound", format!("iteration {i}: recorded {b}, recomputed {expect}"));
            }
            let holds = r.entropy_after >= r.entropy_before + b - 1e-9;
            if r.bound_holds != Some(holds) || !holds {
                fail(
                    "entropy-increase",
                    format!("iteration {i}: gain {} against bound {b}", r.entropy_after - r.entropy_before),
                );
            }
        }
        max_load = max_load.max(r.grouping.load);
    }
    let Some(f) = &t.final_phase else {
        fail("final-phase", "no final record".into());
        return out;
    };
    let b_used = t.iterations.len();
    if f.b_used != b_used {
        fail("b-used", format!("recorded {}, counted {b_used}", f.b_used));
    }
    if f.b_used > cfg.b_max {
        fail("b-max", format!("{} iterations exceed {}", f.b_used, cfg.b_max));
    }
    let delta = g.max_degree();
    if f.delta_measured != delta {
        fail("degree", format!("recorded max degree {}, graph has {delta}", f.delta_measured));
    }
    let bound = b_used * max_load * cfg.k.saturating_sub(1) + f.k_double_prime;
    if f.delta_bound != bound {
        fail("degree-bound", format!("recorded {}, recomputed {bound}", f.delta_bound));
    }
    if delta > bound {
        fail("degree-bound", format!("max degree {delta} exceeds {bound}"));
    }
    let diameter = g.diameter();
    if f.diameter != diameter {
        fail("diameter", format!("recorded {:?}, graph has {diameter:?}", f.diameter));
    }
    if diameter.is_none_or(|d| d > cfg.t) {
        fail("diameter", format!("{diameter:?} exceeds t = {}", cfg.t));
    }
    let r_total = t.cuts_total();
    if f.r_total != r_total {
        fail("r-total", format!("recorded {}, recomputed {r_total}", f.r_total));
    }
    if f.edges != g.m() {
        fail("edge-count", format!("recorded {}, graph has {}", f.edges, g.m()));
    }
    let eta = eta_bound(cfg.n, f.k_double_prime, cfg.phi);
    if (f.eta_bound - eta).abs() > 1e-9 * eta.abs().max(1.0) {
        fail("eta-bound", format!("recorded {}, recomputed {eta}", f.eta_bound));
    }
    match f.max_congestion {
        Some(c) if c <= eta * (1.0 + 1e-9) => {}
        other => fail("congestion", format!("sampled congestion {other:?} against {eta}")),
    }
    out
}
