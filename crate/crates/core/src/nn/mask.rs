//! Bernoulli keep/drop masks for dropout and dropconnect.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::params::ModelParams;
use crate::nn::{DropMode, ModelConfig};

/// What a stochastic mask multiplies into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskTarget {
    /// One mask entry per hidden unit, applied to post-tanh activations.
    Activations,
    /// One mask entry per weight, applied to every layer's weight matrix
    /// (biases are never masked).
    Weights,
}

/// A sampled binary mask plus the inverted-dropout rescale factor.
///
/// Entries are exactly 0.0 (dropped, probability `drop_rate`) or 1.0 (kept).
/// Survivors are rescaled by `scale = 1 / (1 - drop_rate)` when the mask is
/// applied, so the masked forward pass is an unbiased estimate of the
/// deterministic one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMask {
    pub target: MaskTarget,
    /// For [`MaskTarget::Activations`]: one vector per hidden layer.
    /// For [`MaskTarget::Weights`]: one row-major vector per layer,
    /// matching that layer's weight buffer.
    pub layers: Vec<Vec<f64>>,
    pub scale: f64,
    /// Seed this mask was drawn from.
    pub seed: u64,
}

impl StochasticMask {
    /// Draw a fresh mask for `config` from its own seeded stream.
    ///
    /// Entries are drawn layer by layer; within a layer, unit order for
    /// activation masks and row-major order for weight masks.
    pub fn sample(config: &ModelConfig, target: MaskTarget, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = config.drop_rate;
        let draw = |rng: &mut ChaCha8Rng| if rng.gen::<f64>() < p { 0.0 } else { 1.0 };

        let layers = match target {
            MaskTarget::Activations => config
                .hidden_dims
                .iter()
                .map(|&dim| (0..dim).map(|_| draw(&mut rng)).collect())
                .collect(),
            MaskTarget::Weights => config
                .layer_dims()
                .into_iter()
                .map(|(in_dim, out_dim)| (0..in_dim * out_dim).map(|_| draw(&mut rng)).collect())
                .collect(),
        };

        Ok(Self {
            target,
            layers,
            scale: 1.0 / (1.0 - p),
            seed,
        })
    }

    /// The mask target matching a drop mode, if that mode uses masks at all.
    pub fn target_for(mode: DropMode) -> Option<MaskTarget> {
        match mode {
            DropMode::Dropout => Some(MaskTarget::Activations),
            DropMode::DropConnect => Some(MaskTarget::Weights),
            DropMode::None => None,
        }
    }

    /// Check that this mask's shapes fit `params`.
    pub fn validate_for(&self, params: &ModelParams) -> Result<()> {
        match self.target {
            MaskTarget::Activations => {
                let hidden = params.num_layers() - 1;
                if self.layers.len() != hidden {
                    return Err(Error::dimension(format!(
                        "activation mask has {} layers, model has {} hidden layers",
                        self.layers.len(),
                        hidden
                    )));
                }
                for (i, m) in self.layers.iter().enumerate() {
                    let want = params.layers()[i].out_dim();
                    if m.len() != want {
                        return Err(Error::dimension(format!(
                            "activation mask layer {i} has {} entries, expected {want}",
                            m.len()
                        )));
                    }
                }
            }
            MaskTarget::Weights => {
                if self.layers.len() != params.num_layers() {
                    return Err(Error::dimension(format!(
                        "weight mask has {} layers, model has {}",
                        self.layers.len(),
                        params.num_layers()
                    )));
                }
                for (i, m) in self.layers.iter().enumerate() {
                    let layer = &params.layers()[i];
                    let want = layer.in_dim() * layer.out_dim();
                    if m.len() != want {
                        return Err(Error::dimension(format!(
                            "weight mask layer {i} has {} entries, expected {want}",
                            m.len()
                        )));
                    }
                }
            }
        }
        if !self.scale.is_finite() || self.scale < 1.0 {
            return Err(Error::validation(format!(
                "mask scale must be finite and >= 1, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(drop_rate: f64, mode: DropMode) -> ModelConfig {
        ModelConfig::new(6, vec![10, 4], 1)
            .with_classes(3)
            .with_drop(mode, drop_rate)
    }

    #[test]
    fn entries_are_binary_and_shapes_match() {
        let config = cfg(0.4, DropMode::Dropout);
        let mask = StochasticMask::sample(&config, MaskTarget::Activations, 5).unwrap();
        assert_eq!(mask.layers.len(), 2);
        assert_eq!(mask.layers[0].len(), 10);
        assert_eq!(mask.layers[1].len(), 4);
        assert!(mask.layers.iter().flatten().all(|&m| m == 0.0 || m == 1.0));

        let wmask = StochasticMask::sample(&config, MaskTarget::Weights, 5).unwrap();
        assert_eq!(wmask.layers.len(), 3);
        assert_eq!(wmask.layers[0].len(), 6 * 10);
        assert_eq!(wmask.layers[1].len(), 10 * 4);
        assert_eq!(wmask.layers[2].len(), 4 * 3);
    }

    #[test]
    fn zero_fraction_approaches_drop_rate() {
        // 2000 draws of a 14-unit activation mask: 28000 Bernoulli trials.
        let config = cfg(0.3, DropMode::Dropout);
        let mut zeros = 0usize;
        let mut total = 0usize;
        for seed in 0..2000 {
            let mask = StochasticMask::sample(&config, MaskTarget::Activations, seed).unwrap();
            for m in mask.layers.iter().flatten() {
                total += 1;
                if *m == 0.0 {
                    zeros += 1;
                }
            }
        }
        let frac = zeros as f64 / total as f64;
        // Three standard errors of a Bernoulli(0.3) mean at n = 28000.
        let se = (0.3f64 * 0.7 / total as f64).sqrt();
        assert!(
            (frac - 0.3).abs() < 3.0 * se,
            "zero fraction {frac} not within 3 SE of 0.3"
        );
    }

    #[test]
    fn same_seed_same_mask() {
        let config = cfg(0.5, DropMode::Dropout);
        let a = StochasticMask::sample(&config, MaskTarget::Activations, 9).unwrap();
        let b = StochasticMask::sample(&config, MaskTarget::Activations, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validate_rejects_wrong_shapes() {
        let config = cfg(0.5, DropMode::Dropout);
        let params = ModelParams::init(&config).unwrap();
        let other = ModelConfig::new(6, vec![9, 4], 1)
            .with_classes(3)
            .with_drop(DropMode::Dropout, 0.5);
        let mask = StochasticMask::sample(&other, MaskTarget::Activations, 5).unwrap();
        assert!(mask.validate_for(&params).is_err());
    }
}
