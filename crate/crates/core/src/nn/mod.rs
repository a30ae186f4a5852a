//! From-scratch dense feed-forward classifier.
//!
//! Forward pass, backpropagation, dropout/dropconnect masking, cross-entropy
//! loss, SGD and Adam optimizers, and a seeded mini-batch training loop.
//! Hidden layers use tanh activations; the output layer is linear and feeds
//! [`loss::softmax`].

pub mod linalg;
pub mod loss;
pub mod mask;
pub mod net;
pub mod optim;
pub mod params;
pub mod serialize;
pub mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use linalg::Matrix;
pub use loss::{cross_entropy_loss, softmax, PROB_EPSILON};
pub use mask::{MaskTarget, StochasticMask};
pub use optim::OptimizerState;
pub use params::{Gradients, Layer, ModelParams};
pub use serialize::{load_model, model_from_json, model_to_json, save_model};
pub use train::{train, Example, TrainSettings, TrainedModel};

/// Where stochastic masks are applied, if anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropMode {
    /// Bernoulli masks on hidden activations (inverted dropout).
    #[serde(rename = "dropout")]
    Dropout,
    /// Bernoulli masks on individual weights.
    #[serde(rename = "dropconnect")]
    DropConnect,
    /// Fully deterministic network.
    #[serde(rename = "none")]
    None,
}

/// Architecture and regularization settings for one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub num_classes: usize,
    /// Probability that a masked unit or weight is dropped; in [0, 1).
    pub drop_rate: f64,
    pub drop_mode: DropMode,
    /// Seed for weight initialization, shuffling and mask draws.
    pub seed: u64,
}

impl ModelConfig {
    /// A deterministic (mask-free) classifier with the default eight classes.
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_dims,
            num_classes: 8,
            drop_rate: 0.0,
            drop_mode: DropMode::None,
            seed,
        }
    }

    pub fn with_classes(mut self, num_classes: usize) -> Self {
        self.num_classes = num_classes;
        self
    }

    pub fn with_drop(mut self, mode: DropMode, rate: f64) -> Self {
        self.drop_mode = mode;
        self.drop_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::validation(format!(
                "num_classes must be >= 2, got {}",
                self.num_classes
            )));
        }
        if self.input_dim < 1 {
            return Err(Error::validation("input_dim must be >= 1"));
        }
        if self.hidden_dims.iter().any(|&d| d < 1) {
            return Err(Error::validation("hidden layer dims must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.drop_rate) || !self.drop_rate.is_finite() {
            return Err(Error::validation(format!(
                "drop_rate must be in [0, 1), got {}",
                self.drop_rate
            )));
        }
        Ok(())
    }

    /// `(in_dim, out_dim)` for each layer, input through output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.num_classes));
        dims
    }

    pub fn num_layers(&self) -> usize {
        self.hidden_dims.len() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_bounds() {
        let ok = ModelConfig::new(4, vec![8], 0);
        assert!(ok.validate().is_ok());

        let mut bad = ok.clone();
        bad.num_classes = 1;
        assert!(bad.validate().is_err());

        let mut bad = ok.clone();
        bad.drop_rate = 1.0;
        assert!(bad.validate().is_err());

        let mut bad = ok.clone();
        bad.hidden_dims = vec![0];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn layer_dims_chain() {
        let cfg = ModelConfig::new(4, vec![8, 6], 0).with_classes(3);
        assert_eq!(cfg.layer_dims(), vec![(4, 8), (8, 6), (6, 3)]);
        assert_eq!(cfg.num_layers(), 3);
    }
}
