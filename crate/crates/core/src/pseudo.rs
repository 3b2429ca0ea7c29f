//! Pseudo-distributions and their entropy.
//!
//! A pseudo-distribution is a vector with entries in `[0, 1]` that need not
//! sum to one. Entropy uses the natural logarithm with `H(0) = 0`. The
//! splitting and merging operations here are the building blocks of the
//! potential argument used by the commodity walk in [`crate::game`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for sum and range checks at construction time.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Tolerance used when asserting the entropy inequalities.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PseudoError {
    #[error("entry {index} has value {value}, outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("split plan for entry {index} sums to {parts_sum}, expected {value}")]
    InconsistentPlan {
        index: usize,
        value: f64,
        parts_sum: f64,
    },
    #[error("split plan has {plan} entries but the distribution has {len}")]
    PlanLength { plan: usize, len: usize },
    #[error("merged entry {group} has value {value} > 1")]
    OverflowedEntry { group: usize, value: f64 },
    #[error("merge partition does not cover index {0} exactly once")]
    PartitionMismatch(usize),
}

/// Single entropy term `-u ln u`, with `H(0) = 0`.
#[inline]
pub fn entropy_term(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        -u * u.ln()
    }
}

/// Sum of `-u ln u` over a slice. No range check.
pub fn entropy_of(values: &[f64]) -> f64 {
    values.iter().map(|&u| entropy_term(u)).sum()
}

/// A vector `q ∈ [0,1]^S` over the support `S = {0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoDistribution {
    values: Vec<f64>,
    size: f64,
}

impl PseudoDistribution {
    /// Validates every entry lies in `[0, 1]`. Values within
    /// [`CONSTRUCTION_TOL`] of the boundary are clamped.
    pub fn new(values: Vec<f64>) -> Result<Self, PseudoError> {
        let mut values = values;
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -CONSTRUCTION_TOL || *v > 1.0 + CONSTRUCTION_TOL {
                return Err(PseudoError::OutOfRange { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        let size = values.iter().sum();
        Ok(Self { values, size })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            size: 0.0,
        }
    }

    /// Point mass of value 1 at `index`.
    pub fn point(len: usize, index: usize) -> Self {
        let mut values = vec![0.0; len];
        values[index] = 1.0;
        Self { values, size: 1.0 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `||q||`, the cached sum of all entries.
    pub fn size(&self) -> f64 {
        self.size
    }

    /// `q(S')` for a subset of support indices.
    pub fn mass_of(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&i| self.values[i]).sum()
    }

    pub fn is_distribution(&self) -> bool {
        (self.size - 1.0).abs() <= CONSTRUCTION_TOL * self.values.len().max(1) as f64
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

/// `H(p) = Σ -p(i) ln p(i)`.
pub fn entropy(p: &PseudoDistribution) -> f64 {
    entropy_of(&p.values)
}

/// How each entry of a pseudo-distribution is split into parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub parts: Vec<Vec<f64>>,
}

impl SplitPlan {
    /// Splits every entry of `p` into `gamma` equal parts.
    pub fn uniform(p: &PseudoDistribution, gamma: usize) -> Self {
        let parts = p
            .values()
            .iter()
            .map(|&v| vec![v / gamma as f64; gamma])
            .collect();
        Self { parts }
    }

    /// Largest number of parts any entry is split into.
    pub fn max_fan_out(&self) -> usize {
        self.parts.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Partition of the split output that undoes this plan.
    pub fn inverse_partition(&self) -> MergePartition {
        let mut next = 0;
        let groups = self
            .parts
            .iter()
            .map(|parts| {
                let g: Vec<usize> = (next..next + parts.len()).collect();
                next += parts.len();
                g
            })
            .collect();
        MergePartition { groups }
    }
}

/// Splits entry `i` of `p` into the parts listed in `plan.parts[i]`. The
/// output is the concatenation of all parts in index order.
pub fn split(p: &PseudoDistribution, plan: &SplitPlan) -> Result<PseudoDistribution, PseudoError> {
    if plan.parts.len() != p.len() {
        return Err(PseudoError::PlanLength {
            plan: plan.parts.len(),
            len: p.len(),
        });
    }
    let mut out = Vec::with_capacity(plan.parts.iter().map(Vec::len).sum());
    for (index, (parts, &value)) in plan.parts.iter().zip(p.values()).enumerate() {
        let parts_sum: f64 = parts.iter().sum();
        if parts.iter().any(|&x| x < 0.0) || (parts_sum - value).abs() > CONSTRUCTION_TOL {
            return Err(PseudoError::InconsistentPlan {
                index,
                value,
                parts_sum,
            });
        }
        out.extend_from_slice(parts);
    }
    PseudoDistribution::new(out)
}

/// A partition of the support into disjoint groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergePartition {
    pub groups: Vec<Vec<usize>>,
}

impl MergePartition {
    pub fn singletons(len: usize) -> Self {
        Self {
            groups: (0..len).map(|i| vec![i]).collect(),
        }
    }

    /// Merging factor `γ = max |S_i|`.
    pub fn merging_factor(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn validate(&self, len: usize) -> Result<(), PseudoError> {
        let mut seen = vec![false; len];
        for &i in self.groups.iter().flatten() {
            if i >= len || seen[i] {
                return Err(PseudoError::PartitionMismatch(i));
            }
            seen[i] = true;
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(PseudoError::PartitionMismatch(i)),
            None => Ok(()),
        }
    }
}

/// `p(i) = Σ_{j ∈ S_i} q(j)`.
pub fn merge(
    q: &PseudoDistribution,
    partition: &MergePartition,
) -> Result<PseudoDistribution, PseudoError> {
    partition.validate(q.len())?;
    let mut out = Vec::with_capacity(partition.groups.len());
    for (group, members) in partition.groups.iter().enumerate() {
        let value = q.mass_of(members);
        if value > 1.0 + CONSTRUCTION_TOL {
            return Err(PseudoError::OverflowedEntry { group, value });
        }
        out.push(value);
    }
    PseudoDistribution::new(out)
}
