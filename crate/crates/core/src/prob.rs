//! Points on the probability simplex.

use serde::Serialize;

use crate::error::{Error, Result};

/// How far a vector's sum may stray from 1 and still count as a
/// probability distribution.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// A probability distribution over K classes: finite non-negative entries
/// summing to one (within [`SIMPLEX_TOLERANCE`]).
///
/// This is the unit every metric operates on; constructing one validates
/// the simplex condition once so downstream code does not have to.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("probability vector must be non-empty"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "probability vector entry {i} is not finite: {v}"
                )));
            }
            if v < 0.0 {
                return Err(Error::validation(format!(
                    "probability vector entry {i} is negative: {v}"
                )));
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::validation(format!(
                "probability vector sums to {sum}, expected 1 within {SIMPLEX_TOLERANCE}"
            )));
        }
        Ok(Self(values))
    }

    /// The uniform distribution over `num_classes` classes.
    pub fn uniform(num_classes: usize) -> Self {
        assert!(num_classes >= 1, "uniform distribution needs >= 1 class");
        Self(vec![1.0 / num_classes as f64; num_classes])
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.0)
    }

    /// The largest entry, i.e. the confidence of the predicted class.
    pub fn max_prob(&self) -> f64 {
        self.0[self.argmax()]
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Index of the largest value in `values`; ties resolve to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "argmax of empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
