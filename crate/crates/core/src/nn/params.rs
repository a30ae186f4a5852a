//! Trainable parameters: per-layer weight matrices and bias vectors.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::linalg::Matrix;
use crate::nn::ModelConfig;

/// One dense layer: `out_dim x in_dim` weights plus a bias per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weights: Matrix::zeros(out_dim, in_dim),
            biases: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// All weights and biases of a feed-forward classifier.
///
/// Layer `i`'s output dimension always equals layer `i+1`'s input dimension;
/// constructors enforce the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<Layer>,
}

impl ModelParams {
    /// Initialize from `config.seed`: weights uniform in
    /// `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::init_with_rng(config, &mut rng)
    }

    /// As [`ModelParams::init`] but drawing from a caller-owned stream.
    /// Weight entries are drawn in layer order, row-major within a layer.
    pub fn init_with_rng(config: &ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let layers = config
            .layer_dims()
            .into_iter()
            .map(|(in_dim, out_dim)| {
                let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
                Layer {
                    weights: Matrix::from_fn(out_dim, in_dim, |_, _| rng.gen_range(-limit..limit)),
                    biases: vec![0.0; out_dim],
                }
            })
            .collect();
        Ok(Self { layers })
    }

    /// All-zero parameters with the shape demanded by `config`.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            layers: config
                .layer_dims()
                .into_iter()
                .map(|(i, o)| Layer::zeros(i, o))
                .collect(),
        })
    }

    /// Assemble from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::dimension("a model needs at least one layer"));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.biases.len() != layer.out_dim() {
                return Err(Error::dimension(format!(
                    "layer {i}: {} biases for {} output units",
                    layer.biases.len(),
                    layer.out_dim()
                )));
            }
            if i > 0 && layers[i - 1].out_dim() != layer.in_dim() {
                return Err(Error::dimension(format!(
                    "layer {i} input dim {} does not match previous output dim {}",
                    layer.in_dim(),
                    layers[i - 1].out_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.all_finite() && l.biases.iter().all(|b| b.is_finite()))
    }

    /// True when this parameter set has the shapes `config` demands.
    pub fn matches_config(&self, config: &ModelConfig) -> bool {
        let dims = config.layer_dims();
        self.layers.len() == dims.len()
            && self
                .layers
                .iter()
                .zip(&dims)
                .all(|(l, &(i, o))| l.in_dim() == i && l.out_dim() == o)
    }
}

/// Per-parameter gradient buffer, shape-identical to its [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            layers: params
                .layers()
                .iter()
                .map(|l| Layer::zeros(l.in_dim(), l.out_dim()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        debug_assert_eq!(self.layers.len(), other.layers.len());
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.data_mut().iter_mut().zip(b.weights.data()) {
                *x += y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for w in layer.weights.data_mut() {
                *w *= factor;
            }
            for b in &mut layer.biases {
                *b *= factor;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.all_finite() && l.biases.iter().all(|b| b.is_finite()))
    }

    pub fn same_shape(&self, params: &ModelParams) -> bool {
        self.layers.len() == params.layers().len()
            && self
                .layers
                .iter()
                .zip(params.layers())
                .all(|(g, p)| g.in_dim() == p.in_dim() && g.out_dim() == p.out_dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ModelConfig;

    #[test]
    fn init_respects_glorot_bounds() {
        let cfg = ModelConfig::new(4, vec![8], 42).with_classes(3);
        let params = ModelParams::init(&cfg).unwrap();
        assert!(params.matches_config(&cfg));
        for layer in params.layers() {
            let limit = (6.0 / (layer.in_dim() + layer.out_dim()) as f64).sqrt();
            assert!(layer.weights.data().iter().all(|w| w.abs() < limit));
            assert!(layer.biases.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let cfg = ModelConfig::new(4, vec![8], 7).with_classes(3);
        let a = ModelParams::init(&cfg).unwrap();
        let b = ModelParams::init(&cfg).unwrap();
        assert_eq!(a, b);

        let other = ModelConfig::new(4, vec![8], 8).with_classes(3);
        assert_ne!(a, ModelParams::init(&other).unwrap());
    }

    #[test]
    fn from_layers_rejects_broken_chain() {
        let layers = vec![Layer::zeros(4, 8), Layer::zeros(7, 3)];
        assert!(ModelParams::from_layers(layers).is_err());
    }
}
