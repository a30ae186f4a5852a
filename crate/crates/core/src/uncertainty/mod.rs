//! Stochastic predictors: MC-Dropout, MC-DropConnect and deep ensembles.
//!
//! All three produce a [`PredictiveSamples`]: an ordered list of T softmax
//! outputs for one input plus their arithmetic mean. MC methods keep their
//! masks active at prediction time and draw a fresh mask per pass; ensemble
//! members are always evaluated deterministically.

mod ensemble;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{softmax, DropMode, MaskTarget, ModelConfig, ModelParams, StochasticMask};
use crate::prob::ProbabilityVector;

pub use ensemble::{
    ensemble_predict, load_ensemble, save_ensemble, train_ensemble, train_ensemble_with_seeds,
    Ensemble, ENSEMBLE_FORMAT_VERSION,
};

/// Which predictor produced a set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mc-dropout")]
    McDropout,
    #[serde(rename = "mc-dropconnect")]
    McDropconnect,
    #[serde(rename = "ensemble")]
    DeepEnsemble,
    #[serde(rename = "deterministic")]
    Deterministic,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Deterministic,
        Method::McDropout,
        Method::McDropconnect,
        Method::DeepEnsemble,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::McDropout => "mc-dropout",
            Method::McDropconnect => "mc-dropconnect",
            Method::DeepEnsemble => "ensemble",
            Method::Deterministic => "deterministic",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "mc-dropout" => Ok(Method::McDropout),
            "mc-dropconnect" => Ok(Method::McDropconnect),
            "ensemble" => Ok(Method::DeepEnsemble),
            "deterministic" => Ok(Method::Deterministic),
            other => Err(Error::validation(format!(
                "unknown method '{other}' (expected mc-dropout, mc-dropconnect, ensemble or deterministic)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// T stochastic probability vectors for one input, in draw order, plus
/// their entrywise arithmetic mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSamples {
    method: Method,
    samples: Vec<ProbabilityVector>,
    mean: ProbabilityVector,
}

impl PredictiveSamples {
    /// Wrap T >= 1 equal-length samples; the mean is computed here so it is
    /// exactly the arithmetic average of the samples.
    pub fn from_samples(method: Method, samples: Vec<ProbabilityVector>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("need at least one predictive sample"));
        }
        let k = samples[0].num_classes();
        if samples.iter().any(|s| s.num_classes() != k) {
            return Err(Error::dimension("samples have mixed class counts"));
        }
        let mean = mean_of(&samples, samples.len())?;
        Ok(Self {
            method,
            samples,
            mean,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn samples(&self) -> &[ProbabilityVector] {
        &self.samples
    }

    pub fn num_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn num_classes(&self) -> usize {
        self.mean.num_classes()
    }

    pub fn mean(&self) -> &ProbabilityVector {
        &self.mean
    }

    /// Mean of the first `k` samples. Sweeps over T evaluate prefixes of one
    /// draw sequence, so the T = t curve reuses the T = t_max draws.
    pub fn prefix_mean(&self, k: usize) -> Result<ProbabilityVector> {
        if k == 0 || k > self.samples.len() {
            return Err(Error::validation(format!(
                "prefix length {k} out of range 1..={}",
                self.samples.len()
            )));
        }
        mean_of(&self.samples, k)
    }
}

fn mean_of(samples: &[ProbabilityVector], k: usize) -> Result<ProbabilityVector> {
    let classes = samples[0].num_classes();
    let mut acc = vec![0.0; classes];
    for sample in &samples[..k] {
        for (a, &p) in acc.iter_mut().zip(sample.as_slice()) {
            *a += p;
        }
    }
    for a in &mut acc {
        *a /= k as f64;
    }
    ProbabilityVector::new(acc)
}

/// A single mask-free forward pass wrapped as a one-sample prediction.
pub fn deterministic_predict(params: &ModelParams, input: &[f64]) -> Result<PredictiveSamples> {
    let probs = softmax(&params.forward(input, None)?)?;
    PredictiveSamples::from_samples(Method::Deterministic, vec![probs])
}

/// T forward passes with fresh activation masks, recorded in draw order.
pub fn mc_dropout_predict(
    params: &ModelParams,
    config: &ModelConfig,
    input: &[f64],
    passes: usize,
    seed: u64,
) -> Result<PredictiveSamples> {
    if config.drop_mode != DropMode::Dropout {
        return Err(Error::validation(
            "mc_dropout_predict requires drop_mode = dropout",
        ));
    }
    mc_predict(
        Method::McDropout,
        MaskTarget::Activations,
        params,
        config,
        input,
        passes,
        seed,
    )
}

/// T forward passes with fresh weight masks, recorded in draw order.
pub fn mc_dropconnect_predict(
    params: &ModelParams,
    config: &ModelConfig,
    input: &[f64],
    passes: usize,
    seed: u64,
) -> Result<PredictiveSamples> {
    if config.drop_mode != DropMode::DropConnect {
        return Err(Error::validation(
            "mc_dropconnect_predict requires drop_mode = dropconnect",
        ));
    }
    mc_predict(
        Method::McDropconnect,
        MaskTarget::Weights,
        params,
        config,
        input,
        passes,
        seed,
    )
}

fn mc_predict(
    method: Method,
    target: MaskTarget,
    params: &ModelParams,
    config: &ModelConfig,
    input: &[f64],
    passes: usize,
    seed: u64,
) -> Result<PredictiveSamples> {
    config.validate()?;
    if passes == 0 {
        return Err(Error::validation(
            "number of stochastic passes must be >= 1",
        ));
    }
    if !params.matches_config(config) {
        return Err(Error::dimension("params do not match the supplied config"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(passes);
    for _ in 0..passes {
        let mask = StochasticMask::sample(config, target, rng.gen())?;
        samples.push(softmax(&params.forward(input, Some(&mask))?)?);
    }
    PredictiveSamples::from_samples(method, samples)
}
