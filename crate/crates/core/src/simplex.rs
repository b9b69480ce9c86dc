//! Points of the probability simplex over a finite scenario set and the
//! divergences used to build ambiguity sets around them.
//!
//! ```text
//! I(P', P)    = sum_i P'(i) log(P'(i) / P(i))      (0 log 0 = 0, p log(p/0) = inf)
//! ||D||_P^2   = 1/2 sum_i D_i^2 / P(i)             (local ellipsoid norm)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sums within this distance of one are renormalized silently.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Sums farther than this from one are rejected.
pub const REJECT_TOL: f64 = 1e-6;

/// A probability vector over `d` scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates and normalizes `weights`.
    ///
    /// Negative dust above `-NORMALIZATION_TOL` is clamped to zero. A sum
    /// off by more than [`REJECT_TOL`] is an error; anything closer is
    /// renormalized.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 scenarios, got {}",
                weights.len()
            )));
        }
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("weight {i} is not finite")));
            }
            if *w < 0.0 {
                if *w < -NORMALIZATION_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "weight {i} is negative ({w})"
                    )));
                }
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > REJECT_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        if (sum - 1.0).abs() > f64::EPSILON {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Ok(Self { weights })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d])
    }

    /// Unit mass on scenario `i`.
    pub fn vertex(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::IndexOutOfRange {
                what: "scenarios",
                index: i,
                len: d,
            });
        }
        let mut w = vec![0.0; d];
        w[i] = 1.0;
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_interior(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Errors with the first zero weight when the point is on the boundary.
    pub fn require_interior(&self) -> Result<()> {
        match self.weights.iter().position(|&w| w <= 0.0) {
            Some(index) => Err(Error::NotInterior {
                index,
                weight: self.weights[index],
            }),
            None => Ok(()),
        }
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `min_i min(P(i), 1 - P(i))`, the distance of the point to the faces
    /// of the simplex in the sup norm.
    pub fn margin(&self) -> f64 {
        self.weights
            .iter()
            .map(|&w| w.min(1.0 - w))
            .fold(f64::INFINITY, f64::min)
    }

    /// Difference `self - other` as a tangent vector of the simplex.
    pub fn delta_from(&self, other: &Distribution) -> Result<SimplexDelta> {
        check_dim(other.dim(), self.dim())?;
        SimplexDelta::new(
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self { weights }
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.weights
    }
}

/// Scenario counts of `T` observations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    counts: Vec<u64>,
    sample_size: u64,
}

impl EmpiricalDistribution {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 scenarios, got {}",
                counts.len()
            )));
        }
        let sample_size: u64 = counts.iter().sum();
        if sample_size == 0 {
            return Err(Error::InvalidDistribution("sample size must be at least 1".into()));
        }
        Ok(Self {
            counts,
            sample_size,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Weights `counts / T`. Each weight is the correctly rounded quotient.
    pub fn to_distribution(&self) -> Distribution {
        let t = self.sample_size as f64;
        Distribution::from_raw(self.counts.iter().map(|&c| c as f64 / t).collect())
    }

    pub fn is_interior(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }
}

/// A direction in the simplex hyperplane `{D : sum_i D_i = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexDelta {
    components: Vec<f64>,
}

impl SimplexDelta {
    /// The sum must vanish within `1e-12` relative to the l1 size of the
    /// vector (absolute for vectors of l1 norm at most one).
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let sum: f64 = components.iter().sum();
        let scale = components.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        if !sum.is_finite() || sum.abs() > NORMALIZATION_TOL * scale {
            return Err(Error::InvalidDelta { sum });
        }
        Ok(Self { components })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            components: vec![0.0; d],
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }
}

pub(crate) fn check_dim(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Relative entropy `I(p, q)`; `+inf` when the support of `p` is not
/// contained in the support of `q`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dim(q.dim(), p.dim())?;
    Ok(kl_weights(p.weights(), q.weights()))
}

pub(crate) fn kl_weights(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        total += a * (a / b).ln();
    }
    total.max(0.0)
}

/// `||delta||_p^2 = 1/2 sum_i delta_i^2 / p(i)`.
pub fn ellipsoid_norm_sq(delta: &SimplexDelta, p: &Distribution) -> Result<f64> {
    check_dim(delta.dim(), p.dim())?;
    p.require_interior()?;
    Ok(0.5
        * delta
            .components()
            .iter()
            .zip(p.weights())
            .map(|(d, w)| d * d / w)
            .sum::<f64>())
}
