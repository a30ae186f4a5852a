//! Experiment configuration: a TOML file with CLI-flag overrides.
//!
//! Every field has a default, so `uq sweep` with no config runs the
//! synthetic experiment out of the box. Flags win over file values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use uq_core::data::{load_ferplus_csv, synth_aleatoric, Dataset};
use uq_core::nn::{DropMode, ModelConfig, OptimizerState};
use uq_core::uncertainty::Method;
use uq_core::{Error, Result};

use crate::{stream_seed, streams};

/// Where the experiment's samples come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    /// A canonical crowd-labelled CSV on disk.
    Ferplus { path: PathBuf },
    /// Generated Gaussian blobs with crowd-style vote labels.
    Synthetic {
        #[serde(default = "defaults::num_samples")]
        num_samples: usize,
        #[serde(default = "defaults::num_classes")]
        num_classes: usize,
        #[serde(default = "defaults::input_dim")]
        input_dim: usize,
        #[serde(default = "defaults::flip_rate")]
        flip_rate: f64,
    },
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Synthetic {
            num_samples: defaults::num_samples(),
            num_classes: defaults::num_classes(),
            input_dim: defaults::input_dim(),
            flip_rate: defaults::flip_rate(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "defaults::hidden_dims")]
    pub hidden_dims: Vec<usize>,
    /// Drop rate used by the MC methods (both train- and test-time masks).
    #[serde(default = "defaults::drop_rate")]
    pub drop_rate: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden_dims: defaults::hidden_dims(),
            drop_rate: defaults::drop_rate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerChoice {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default = "defaults::optimizer")]
    pub optimizer: OptimizerChoice,
    /// Defaults to 1e-3 for Adam and 1e-2 for SGD when omitted.
    #[serde(default)]
    pub learning_rate: Option<f64>,
    /// SGD learning-rate decay; ignored by Adam.
    #[serde(default)]
    pub decay: f64,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            optimizer: defaults::optimizer(),
            learning_rate: None,
            decay: 0.0,
            epochs: defaults::epochs(),
            batch_size: defaults::batch_size(),
        }
    }
}

/// The whole experiment: dataset, architecture, training recipe, methods,
/// sweep range and output location.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::master_seed")]
    pub master_seed: u64,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "defaults::methods")]
    pub methods: Vec<Method>,
    /// Max stochastic passes T for MC methods and members N for ensembles.
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::ece_bins")]
    pub ece_bins: usize,
    /// How many most-uncertain samples the report lists.
    #[serde(default = "defaults::top_k")]
    pub top_k: usize,
    /// Ensemble sizes shown in the uncertain-sample report.
    #[serde(default = "defaults::report_sizes")]
    pub report_sizes: Vec<usize>,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub training: TrainingSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: defaults::master_seed(),
            out_dir: defaults::out_dir(),
            methods: defaults::methods(),
            samples: defaults::samples(),
            ece_bins: defaults::ece_bins(),
            top_k: defaults::top_k(),
            report_sizes: defaults::report_sizes(),
            dataset: DatasetConfig::default(),
            model: ModelSection::default(),
            training: TrainingSection::default(),
        }
    }
}

mod defaults {
    use std::path::PathBuf;
    use uq_core::uncertainty::Method;

    use super::OptimizerChoice;

    pub fn master_seed() -> u64 {
        7
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn methods() -> Vec<Method> {
        Method::ALL.to_vec()
    }
    pub fn samples() -> usize {
        15
    }
    pub fn ece_bins() -> usize {
        15
    }
    pub fn top_k() -> usize {
        5
    }
    pub fn report_sizes() -> Vec<usize> {
        vec![1, 5, 10, 15]
    }
    pub fn num_samples() -> usize {
        2000
    }
    pub fn num_classes() -> usize {
        8
    }
    pub fn input_dim() -> usize {
        16
    }
    pub fn flip_rate() -> f64 {
        0.3
    }
    pub fn hidden_dims() -> Vec<usize> {
        vec![32]
    }
    pub fn drop_rate() -> f64 {
        0.5
    }
    pub fn optimizer() -> OptimizerChoice {
        OptimizerChoice::Adam
    }
    pub fn epochs() -> usize {
        20
    }
    pub fn batch_size() -> usize {
        32
    }
}

/// CLI-flag overrides; `None` means "keep the config value".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub method: Option<Method>,
    pub samples: Option<usize>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Apply CLI overrides; `--method` narrows the run to one method.
    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.master_seed = seed;
        }
        if let Some(out) = &overrides.out {
            self.out_dir = out.clone();
        }
        if let Some(method) = overrides.method {
            self.methods = vec![method];
        }
        if let Some(samples) = overrides.samples {
            self.samples = samples;
        }
        if let Some(epochs) = overrides.epochs {
            self.training.epochs = epochs;
        }
        if let Some(batch_size) = overrides.batch_size {
            self.training.batch_size = batch_size;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::validation("no methods configured"));
        }
        if self.samples == 0 {
            return Err(Error::validation("samples must be >= 1"));
        }
        if self.ece_bins == 0 {
            return Err(Error::validation("ece_bins must be >= 1"));
        }
        if self.report_sizes.is_empty() {
            return Err(Error::validation("report_sizes must be non-empty"));
        }
        if self.report_sizes.contains(&0) {
            return Err(Error::validation("report_sizes entries must be >= 1"));
        }
        if self.training.batch_size == 0 {
            return Err(Error::validation("batch_size must be >= 1"));
        }
        if let Some(lr) = self.training.learning_rate {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::validation(format!(
                    "learning_rate must be positive, got {lr}"
                )));
            }
        }
        if let DatasetConfig::Ferplus { path } = &self.dataset {
            if !path.exists() {
                return Err(Error::validation(format!(
                    "dataset file does not exist: {}",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Network settings for one method: MC methods train and sample with
    /// their masks, deterministic models and ensemble members use none.
    pub fn model_config_for(
        &self,
        method: Method,
        input_dim: usize,
        num_classes: usize,
    ) -> ModelConfig {
        let (drop_mode, drop_rate) = match method {
            Method::McDropout => (DropMode::Dropout, self.model.drop_rate),
            Method::McDropconnect => (DropMode::DropConnect, self.model.drop_rate),
            Method::Deterministic | Method::DeepEnsemble => (DropMode::None, 0.0),
        };
        ModelConfig {
            input_dim,
            hidden_dims: self.model.hidden_dims.clone(),
            num_classes,
            drop_rate,
            drop_mode,
            seed: self.master_seed,
        }
    }

    pub fn optimizer_state(&self) -> Result<OptimizerState> {
        match self.training.optimizer {
            OptimizerChoice::Adam => OptimizerState::adam(
                self.training
                    .learning_rate
                    .unwrap_or(OptimizerState::DEFAULT_ADAM_LR),
            ),
            OptimizerChoice::Sgd => OptimizerState::sgd(
                self.training
                    .learning_rate
                    .unwrap_or(OptimizerState::DEFAULT_SGD_LR),
                self.training.decay,
            ),
        }
    }
}

/// Materialize the configured dataset. Returns the dataset and the number
/// of skipped CSV rows (always zero for synthetic data).
pub fn load_dataset(config: &ExperimentConfig) -> Result<(Dataset, usize)> {
    match &config.dataset {
        DatasetConfig::Ferplus { path } => {
            let outcome = load_ferplus_csv(path)?;
            Ok((outcome.dataset, outcome.skipped_rows))
        }
        DatasetConfig::Synthetic {
            num_samples,
            num_classes,
            input_dim,
            flip_rate,
        } => {
            let ds = synth_aleatoric(
                *num_samples,
                *num_classes,
                *input_dim,
                *flip_rate,
                stream_seed(config.master_seed, streams::DATA),
            )?;
            Ok((ds, 0))
        }
    }
}
