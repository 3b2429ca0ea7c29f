//! The idealized instance: `n = k^T` vertices as base-`k` digit strings,
//! and iteration `i` matches vertices that differ only in digit `i`.

use super::HarnessError;
use crate::clustering::Grouping;
use crate::game::{CommodityState, Link, WalkStep};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupIteration {
    pub index: usize,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub delta: f64,
    /// `n·ln k`.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupReport {
    pub n: usize,
    pub k: usize,
    pub digits: usize,
    pub iterations: Vec<WarmupIteration>,
    pub final_entropy: f64,
    /// `n·ln n`.
    pub entropy_cap: f64,
}

/// `T` with `k^T = n`, if any.
pub fn digits_of(n: usize, k: usize) -> Option<usize> {
    if k < 2 || n < 1 {
        return None;
    }
    let (mut m, mut d) = (n, 0);
    while m % k == 0 {
        m /= k;
        d += 1;
    }
    (m == 1).then_some(d)
}

/// One group whose `k` blocks hold the vertices by their digit `i`, with
/// every vertex matched to its `k - 1` digit-`i` siblings.
pub fn digit_step(n: usize, k: usize, i: usize) -> (Grouping, WalkStep) {
    let stride = k.pow(i as u32);
    let digit = |v: usize| (v / stride) % k;
    let blocks: Vec<Vec<usize>> = (0..k)
        .map(|a| (0..n).filter(|&v| digit(v) == a).collect())
        .collect();
    let mut edges = Vec::new();
    for v in 0..n {
        for b in digit(v) + 1..k {
            let u = v + (b - digit(v)) * stride;
            let id = edges.len();
            edges.push((v, u, Link::Kept(id)));
        }
    }
    let grouping = Grouping {
        n,
        groups: vec![blocks],
        block_size: n / k,
        separation_bound: 1,
        load: 1,
        dropped: Vec::new(),
    };
    let step = WalkStep::build(&grouping, k, &[edges]).expect("digit siblings form cliques of size k");
    (grouping, step)
}

/// Runs the walk until `H(P)` reaches `n·ln n`.
pub fn run_warmup(n: usize, k: usize) -> Result<WarmupReport, HarnessError> {
    let digits = digits_of(n, k)
        .ok_or_else(|| HarnessError::InvalidInput(format!("n = {n} is not a power of k = {k}")))?;
    let cap = n as f64 * (n as f64).ln();
    let mut state = CommodityState::new(n);
    let mut iterations = Vec::new();
    let none = BTreeSet::new();
    while state.entropy() < cap - 1e-9 && iterations.len() < digits {
        let i = iterations.len();
        let (_, step) = digit_step(n, k, i);
        let before = state.entropy();
        state.leak_unloaded(&step);
        state
            .step(&step, &none)
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
        let after = state.entropy();
        iterations.push(WarmupIteration {
            index: i + 1,
            entropy_before: before,
            entropy_after: after,
            delta: after - before,
            expected: n as f64 * (k as f64).ln(),
        });
    }
    Ok(WarmupReport {
        n,
        k,
        digits,
        iterations,
        final_entropy: state.entropy(),
        entropy_cap: cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_counting() {
        assert_eq!(digits_of(64, 4), Some(3));
        assert_eq!(digits_of(1, 3), Some(0));
        assert_eq!(digits_of(48, 4), None);
        assert_eq!(digits_of(8, 1), None);
    }

    #[test]
    fn mixing_step_is_the_lazy_walk() {
        // stay with 1/k, move to each digit sibling with 1/k
        let (n, k) = (27, 3);
        let mut state = CommodityState::new(n);
        for i in 0..2 {
            let (_, step) = digit_step(n, k, i);
            let before = state.clone();
            state.step(&step, &BTreeSet::new()).unwrap();
            let stride = k.pow(i as u32);
            for v in 0..n {
                let base = v - ((v / stride) % k) * stride;
                for nu in 0..n {
                    let expect: f64 = (0..k)
                        .map(|a| before.p[(base + a * stride) * n + nu])
                        .sum::<f64>()
                        / k as f64;
                    assert!((state.p[v * n + nu] - expect).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn sixteen_by_four() {
        let r = run_warmup(16, 4).unwrap();
        assert_eq!(r.iterations.len(), 2);
        for it in &r.iterations {
            assert!((it.delta - 16.0 * 4f64.ln()).abs() < 1e-9);
        }
        assert!((r.final_entropy - r.entropy_cap).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_powers() {
        assert!(run_warmup(12, 4).is_err());
    }
}
