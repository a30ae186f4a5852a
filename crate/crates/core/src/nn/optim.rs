//! SGD with learning-rate decay, and Adam.

use crate::error::{Error, Result};
use crate::nn::params::{Gradients, ModelParams};

/// SGD decay and Adam moment settings.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerKind {
    /// Plain gradient descent with the schedule `lr_t = lr0 / (1 + decay * t)`,
    /// where `t` counts completed steps (the first step uses `lr0`).
    Sgd { decay: f64 },
    /// Bias-corrected adaptive moments.
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

/// Optimizer hyper-parameters plus its mutable accumulators.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimizerKind,
    learning_rate: f64,
    step: u64,
    first_moment: Option<Gradients>,
    second_moment: Option<Gradients>,
}

impl OptimizerState {
    pub const DEFAULT_SGD_LR: f64 = 1e-2;
    pub const DEFAULT_ADAM_LR: f64 = 1e-3;

    pub fn sgd(learning_rate: f64, decay: f64) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::validation(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(Error::validation(format!(
                "decay must be non-negative, got {decay}"
            )));
        }
        Ok(Self {
            kind: OptimizerKind::Sgd { decay },
            learning_rate,
            step: 0,
            first_moment: None,
            second_moment: None,
        })
    }

    /// Adam with beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn adam(learning_rate: f64) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::validation(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        Ok(Self {
            kind: OptimizerKind::Adam {
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            learning_rate,
            step: 0,
            first_moment: None,
            second_moment: None,
        })
    }

    pub fn default_sgd() -> Self {
        Self::sgd(Self::DEFAULT_SGD_LR, 0.0).expect("defaults are valid")
    }

    pub fn default_adam() -> Self {
        Self::adam(Self::DEFAULT_ADAM_LR).expect("defaults are valid")
    }

    pub fn kind(&self) -> &OptimizerKind {
        &self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Number of completed steps.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update in place. Non-finite gradients refuse the step and
    /// leave both the parameters and the optimizer state untouched.
    pub fn step(&mut self, params: &mut ModelParams, grads: &Gradients) -> Result<()> {
        if !grads.same_shape(params) {
            return Err(Error::dimension(
                "gradient shapes do not match parameter shapes",
            ));
        }
        if !grads.all_finite() {
            return Err(Error::training("non-finite gradients, step refused"));
        }

        match self.kind {
            OptimizerKind::Sgd { decay } => {
                let lr = self.learning_rate / (1.0 + decay * self.step as f64);
                for (p, g) in params.layers_mut().iter_mut().zip(&grads.layers) {
                    for (w, gw) in p.weights.data_mut().iter_mut().zip(g.weights.data()) {
                        *w -= lr * gw;
                    }
                    for (b, gb) in p.biases.iter_mut().zip(&g.biases) {
                        *b -= lr * gb;
                    }
                }
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let m = self
                    .first_moment
                    .get_or_insert_with(|| Gradients::zeros_like(params));
                let v = self
                    .second_moment
                    .get_or_insert_with(|| Gradients::zeros_like(params));
                let t = (self.step + 1) as f64;
                let bc1 = 1.0 - beta1.powf(t);
                let bc2 = 1.0 - beta2.powf(t);
                let lr = self.learning_rate;

                for li in 0..grads.layers.len() {
                    let gl = &grads.layers[li];
                    let ml = &mut m.layers[li];
                    let vl = &mut v.layers[li];
                    let pl = &mut params.layers_mut()[li];

                    for i in 0..gl.weights.data().len() {
                        let g = gl.weights.data()[i];
                        let mi = &mut ml.weights.data_mut()[i];
                        let vi = &mut vl.weights.data_mut()[i];
                        *mi = beta1 * *mi + (1.0 - beta1) * g;
                        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                        let m_hat = *mi / bc1;
                        let v_hat = *vi / bc2;
                        pl.weights.data_mut()[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
                    }
                    for i in 0..gl.biases.len() {
                        let g = gl.biases[i];
                        let mi = &mut ml.biases[i];
                        let vi = &mut vl.biases[i];
                        *mi = beta1 * *mi + (1.0 - beta1) * g;
                        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                        let m_hat = *mi / bc1;
                        let v_hat = *vi / bc2;
                        pl.biases[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
                    }
                }
            }
        }
        self.step += 1;

        if !params.all_finite() {
            return Err(Error::training(
                "parameters became non-finite after optimizer step",
            ));
        }
        Ok(())
    }
}
