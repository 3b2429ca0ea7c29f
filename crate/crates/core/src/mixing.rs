//! Two-step mixing processes over weighted mixer systems.
//!
//! Each vertex splits its mass uniformly over the `w(v)` mixers containing
//! it; each mixer then hands its mass back to its members proportionally to
//! `γ_v = 1 / w(v)`. Such a process preserves size and never decreases
//! entropy. The commodity walk of the game is one instance.

use crate::pseudo::{PseudoDistribution, PseudoError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixingError {
    #[error("vertex {0} carries mass but belongs to no mixer")]
    UncoveredVertex(usize),
    #[error("mixer {0} is empty")]
    EmptyMixer(usize),
    #[error("mixer {mixer} references vertex {vertex} outside 0..{n}")]
    VertexOutOfRange { mixer: usize, vertex: usize, n: usize },
    #[error("vertex {vertex} is in {actual} mixers but its weight is {declared}")]
    WeightMismatch {
        vertex: usize,
        declared: u32,
        actual: u32,
    },
    #[error("distribution has {len} entries, mixer system has {n} vertices")]
    LengthMismatch { len: usize, n: usize },
    #[error(transparent)]
    Pseudo(#[from] PseudoError),
}

/// A multiset of nonempty vertex subsets with derived membership weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixerSystem {
    n: usize,
    mixers: Vec<Vec<usize>>,
    weights: Vec<u32>,
}

impl MixerSystem {
    /// Builds a system and derives `w(v)` as the number of mixers containing
    /// `v`. Vertices in no mixer get weight 0.
    pub fn from_mixers(n: usize, mixers: Vec<Vec<usize>>) -> Result<Self, MixingError> {
        let mut weights = vec![0u32; n];
        let mut sorted = Vec::with_capacity(mixers.len());
        for (i, mut m) in mixers.into_iter().enumerate() {
            if m.is_empty() {
                return Err(MixingError::EmptyMixer(i));
            }
            m.sort_unstable();
            for &v in &m {
                if v >= n {
                    return Err(MixingError::VertexOutOfRange { mixer: i, vertex: v, n });
                }
                weights[v] += 1;
            }
            sorted.push(m);
        }
        Ok(Self {
            n,
            mixers: sorted,
            weights,
        })
    }

    /// Builds a system and checks it against declared weights.
    pub fn with_weights(
        n: usize,
        mixers: Vec<Vec<usize>>,
        weights: Vec<u32>,
    ) -> Result<Self, MixingError> {
        let sys = Self::from_mixers(n, mixers)?;
        for (vertex, (&declared, &actual)) in weights.iter().zip(&sys.weights).enumerate() {
            if declared != actual {
                return Err(MixingError::WeightMismatch {
                    vertex,
                    declared,
                    actual,
                });
            }
        }
        Ok(sys)
    }

    /// Adds a singleton mixer `{v}` for every vertex that belongs to no mixer.
    pub fn cover_with_singletons(mut self) -> Self {
        for v in 0..self.n {
            if self.weights[v] == 0 {
                self.mixers.push(vec![v]);
                self.weights[v] = 1;
            }
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mixers(&self) -> &[Vec<usize>] {
        &self.mixers
    }

    pub fn weight(&self, v: usize) -> u32 {
        self.weights[v]
    }

    /// `γ_v = 1 / w(v)`; zero for uncovered vertices.
    pub fn gamma_vertex(&self, v: usize) -> f64 {
        match self.weights[v] {
            0 => 0.0,
            w => 1.0 / w as f64,
        }
    }

    /// `γ_W = Σ_{v ∈ W} γ_v`.
    pub fn gamma_mixer(&self, mixer: usize) -> f64 {
        self.mixers[mixer]
            .iter()
            .map(|&v| self.gamma_vertex(v))
            .sum()
    }

    fn check_input(&self, p: &PseudoDistribution) -> Result<(), MixingError> {
        if p.len() != self.n {
            return Err(MixingError::LengthMismatch {
                len: p.len(),
                n: self.n,
            });
        }
        match (0..self.n).find(|&v| self.weights[v] == 0 && p.get(v) > 0.0) {
            Some(v) => Err(MixingError::UncoveredVertex(v)),
            None => Ok(()),
        }
    }

    fn intermediate_raw(&self, p: &PseudoDistribution) -> Vec<f64> {
        self.mixers
            .iter()
            .map(|m| m.iter().map(|&v| self.gamma_vertex(v) * p.get(v)).sum())
            .collect()
    }
}

/// First step: `q(W) = Σ_{v ∈ W} γ_v p(v)`, one entry per mixer.
pub fn intermediate(
    p: &PseudoDistribution,
    sys: &MixerSystem,
) -> Result<PseudoDistribution, MixingError> {
    sys.check_input(p)?;
    Ok(PseudoDistribution::new(sys.intermediate_raw(p))?)
}

/// Both steps: `p'(v) = Σ_{W ∋ v} (γ_v / γ_W) q(W)`.
pub fn mix(p: &PseudoDistribution, sys: &MixerSystem) -> Result<PseudoDistribution, MixingError> {
    sys.check_input(p)?;
    let q = sys.intermediate_raw(p);
    let mut out = vec![0.0; sys.n];
    for (i, m) in sys.mixers.iter().enumerate() {
        if q[i] == 0.0 {
            continue;
        }
        let gamma_w = sys.gamma_mixer(i);
        for &v in m {
            out[v] += sys.gamma_vertex(v) / gamma_w * q[i];
        }
    }
    Ok(PseudoDistribution::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo::{entropy, INEQUALITY_TOL};

    fn pd(v: &[f64]) -> PseudoDistribution {
        PseudoDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_mixer_spreads_uniformly() {
        let sys = MixerSystem::from_mixers(2, vec![vec![0, 1]]).unwrap();
        let out = mix(&pd(&[1.0, 0.0]), &sys).unwrap();
        assert_eq!(out.values(), &[0.5, 0.5]);
        assert_eq!(intermediate(&pd(&[1.0, 0.0]), &sys).unwrap().values(), &[1.0]);
    }

    #[test]
    fn singleton_mixers_are_identity() {
        let sys = MixerSystem::from_mixers(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let p = pd(&[0.2, 0.7, 0.1]);
        assert_eq!(mix(&p, &sys).unwrap(), p);
    }

    #[test]
    fn three_vertex_chain() {
        // γ_a = 1, γ_b = 1/2, γ_{ab} = 3/2, q({a,b}) = 1
        let sys =
            MixerSystem::with_weights(3, vec![vec![0, 1], vec![1, 2]], vec![1, 2, 1]).unwrap();
        let p = pd(&[1.0, 0.0, 0.0]);
        let q = intermediate(&p, &sys).unwrap();
        assert_eq!(q.values(), &[1.0, 0.0]);
        let out = mix(&p, &sys).unwrap();
        assert!((out.get(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((out.get(1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(out.get(2), 0.0);
        assert!((out.size() - 1.0).abs() < 1e-12);
        assert!(entropy(&out) >= entropy(&p) - INEQUALITY_TOL);
    }

    #[test]
    fn zero_input_gives_zero() {
        let sys = MixerSystem::from_mixers(3, vec![vec![0, 1, 2]]).unwrap();
        let q = intermediate(&PseudoDistribution::zeros(3), &sys).unwrap();
        assert_eq!(q.values(), &[0.0]);
    }

    #[test]
    fn uncovered_vertex_rejected_then_wrapped() {
        let sys = MixerSystem::from_mixers(3, vec![vec![0, 1]]).unwrap();
        let p = pd(&[0.2, 0.3, 0.5]);
        assert_eq!(mix(&p, &sys), Err(MixingError::UncoveredVertex(2)));
        // zero mass on the uncovered vertex is fine
        assert!(mix(&pd(&[0.5, 0.5, 0.0]), &sys).is_ok());
        let wrapped = sys.cover_with_singletons();
        let out = mix(&p, &wrapped).unwrap();
        assert_eq!(out.get(2), 0.5);
    }

    #[test]
    fn malformed_systems() {
        assert_eq!(
            MixerSystem::from_mixers(2, vec![vec![]]),
            Err(MixingError::EmptyMixer(0))
        );
        assert!(matches!(
            MixerSystem::from_mixers(2, vec![vec![5]]),
            Err(MixingError::VertexOutOfRange { vertex: 5, .. })
        ));
        assert!(matches!(
            MixerSystem::with_weights(2, vec![vec![0, 1]], vec![1, 2]),
            Err(MixingError::WeightMismatch { vertex: 1, .. })
        ));
    }

    #[test]
    fn whole_set_mixers_fix_weight_proportional_distribution() {
        // every mixer is V; w(v) = number of mixers = 3 for all v
        let sys = MixerSystem::from_mixers(4, vec![vec![0, 1, 2, 3]; 3]).unwrap();
        let p = pd(&[0.25; 4]);
        let out = mix(&p, &sys).unwrap();
        for v in 0..4 {
            assert!((out.get(v) - 0.25).abs() < 1e-15);
        }
    }
}
