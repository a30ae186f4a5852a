//! Softmax and categorical cross-entropy.

use crate::error::{Error, Result};
use crate::prob::ProbabilityVector;

/// Probabilities are clamped below at this value before any logarithm.
pub const PROB_EPSILON: f64 = 1e-12;

/// Numerically stabilized softmax: subtracts the max logit before
/// exponentiating, so logits of magnitude 1e3 cannot overflow.
pub fn softmax(logits: &[f64]) -> Result<ProbabilityVector> {
    if logits.is_empty() {
        return Err(Error::validation("softmax of empty logits"));
    }
    if let Some(bad) = logits.iter().find(|v| !v.is_finite()) {
        return Err(Error::validation(format!("non-finite logit: {bad}")));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    ProbabilityVector::new(exps.into_iter().map(|e| e / sum).collect())
}

/// `-ln p[hard_label]`, with the probability clamped below at
/// [`PROB_EPSILON`] so a zero never produces an infinite loss.
pub fn cross_entropy_loss(probs: &ProbabilityVector, hard_label: usize) -> Result<f64> {
    if hard_label >= probs.num_classes() {
        return Err(Error::validation(format!(
            "label {hard_label} out of range for {} classes",
            probs.num_classes()
        )));
    }
    Ok(-probs[hard_label].max(PROB_EPSILON).ln())
}
