//! Forward pass and backpropagation.

// Index loops keep the layer arithmetic explicit.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::nn::loss::{cross_entropy_loss, softmax};
use crate::nn::mask::{MaskTarget, StochasticMask};
use crate::nn::params::{Gradients, Layer, ModelParams};

/// Intermediate values recorded during a forward pass, enough to backprop.
struct ForwardTrace {
    /// Input seen by each layer (`layer_inputs[0]` is the network input;
    /// hidden entries are post-mask activations).
    layer_inputs: Vec<Vec<f64>>,
    /// tanh outputs of each hidden layer, before any activation mask.
    activations: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl ModelParams {
    /// Pre-softmax logits for one input.
    ///
    /// Without a mask the pass is fully deterministic. An activations mask
    /// zeroes hidden units and rescales survivors by `1/(1-drop_rate)`
    /// (inverted dropout); a weights mask does the same to individual
    /// weight entries.
    pub fn forward(&self, input: &[f64], mask: Option<&StochasticMask>) -> Result<Vec<f64>> {
        Ok(self.forward_traced(input, mask)?.logits)
    }

    fn forward_traced(&self, input: &[f64], mask: Option<&StochasticMask>) -> Result<ForwardTrace> {
        if input.len() != self.input_dim() {
            return Err(Error::dimension(format!(
                "input has {} features, model expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        if let Some(bad) = input.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite input value: {bad}")));
        }
        if let Some(m) = mask {
            m.validate_for(self)?;
        }

        let num_layers = self.num_layers();
        let mut layer_inputs = Vec::with_capacity(num_layers);
        let mut activations = Vec::with_capacity(num_layers - 1);
        let mut h = input.to_vec();

        for (i, layer) in self.layers().iter().enumerate() {
            let mut z = match mask {
                Some(m) if m.target == MaskTarget::Weights => {
                    layer.weights.matvec_masked(&h, &m.layers[i], m.scale)
                }
                _ => layer.weights.matvec(&h),
            };
            for (zi, b) in z.iter_mut().zip(&layer.biases) {
                *zi += b;
            }
            layer_inputs.push(h);

            if i + 1 == num_layers {
                return Ok(ForwardTrace {
                    layer_inputs,
                    activations,
                    logits: z,
                });
            }

            let t: Vec<f64> = z.iter().map(|&v| v.tanh()).collect();
            h = match mask {
                Some(m) if m.target == MaskTarget::Activations => t
                    .iter()
                    .zip(&m.layers[i])
                    .map(|(&ti, &mi)| ti * mi * m.scale)
                    .collect(),
                _ => t.clone(),
            };
            activations.push(t);
        }
        unreachable!("loop returns at the output layer")
    }

    /// Exact gradients of `cross_entropy_loss(softmax(forward(..)))` with
    /// respect to every weight and bias.
    ///
    /// The same mask used in the forward pass must be supplied here; the
    /// gradient is taken through the masked computation.
    pub fn backward(
        &self,
        input: &[f64],
        hard_label: usize,
        mask: Option<&StochasticMask>,
    ) -> Result<Gradients> {
        Ok(self.backward_with_loss(input, hard_label, mask)?.1)
    }

    /// Loss and gradients in one pass; the training loop uses this to avoid
    /// a second forward evaluation.
    pub(crate) fn backward_with_loss(
        &self,
        input: &[f64],
        hard_label: usize,
        mask: Option<&StochasticMask>,
    ) -> Result<(f64, Gradients)> {
        let trace = self.forward_traced(input, mask)?;
        let probs = softmax(&trace.logits)?;
        let loss = cross_entropy_loss(&probs, hard_label)?;

        // dL/dz at the output layer: softmax minus one-hot.
        let mut delta: Vec<f64> = probs.as_slice().to_vec();
        delta[hard_label] -= 1.0;

        let mut grad_layers: Vec<Layer> = self
            .layers()
            .iter()
            .map(|l| Layer::zeros(l.in_dim(), l.out_dim()))
            .collect();

        for i in (0..self.num_layers()).rev() {
            let layer = &self.layers()[i];
            let h = &trace.layer_inputs[i];

            // Weight and bias gradients for layer i.
            let grad = &mut grad_layers[i];
            match mask {
                Some(m) if m.target == MaskTarget::Weights => {
                    let mlayer = &m.layers[i];
                    for r in 0..layer.out_dim() {
                        for c in 0..layer.in_dim() {
                            *grad.weights.at_mut(r, c) =
                                delta[r] * h[c] * mlayer[r * layer.in_dim() + c] * m.scale;
                        }
                    }
                }
                _ => {
                    for r in 0..layer.out_dim() {
                        for c in 0..layer.in_dim() {
                            *grad.weights.at_mut(r, c) = delta[r] * h[c];
                        }
                    }
                }
            }
            grad.biases.copy_from_slice(&delta);

            if i == 0 {
                break;
            }

            // Propagate to the previous hidden layer.
            let mut back = match mask {
                Some(m) if m.target == MaskTarget::Weights => {
                    layer.weights.tmatvec_masked(&delta, &m.layers[i], m.scale)
                }
                _ => layer.weights.tmatvec(&delta),
            };
            if let Some(m) = mask {
                if m.target == MaskTarget::Activations {
                    for (b, &mi) in back.iter_mut().zip(&m.layers[i - 1]) {
                        *b *= mi * m.scale;
                    }
                }
            }
            let t = &trace.activations[i - 1];
            delta = back
                .iter()
                .zip(t)
                .map(|(&b, &ti)| b * (1.0 - ti * ti))
                .collect();
        }

        Ok((
            loss,
            Gradients {
                layers: grad_layers,
            },
        ))
    }
}
