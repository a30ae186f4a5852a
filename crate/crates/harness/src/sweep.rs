//! Method preparation and nested T/N sweeps.
//!
//! A sweep draws `samples` stochastic passes (or trains `samples` ensemble
//! members) once, then evaluates every T as a prefix of that one draw
//! sequence. Curves are therefore nested: the T row reuses exactly the
//! first T samples of the T_max run.

use uq_core::data::{Dataset, LabelDistribution, Usage};
use uq_core::metrics::{evaluate, reliability_curve, CalibrationBins};
use uq_core::nn::{train, Example, TrainSettings, TrainedModel};
use uq_core::prob::ProbabilityVector;
use uq_core::uncertainty::{
    deterministic_predict, ensemble_predict, mc_dropconnect_predict, mc_dropout_predict,
    train_ensemble, Ensemble, Method, PredictiveSamples,
};
use uq_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::{stream_seed, streams};

/// What training produced for one method.
#[derive(Debug, Clone)]
pub enum TrainedArtifact {
    /// One network (deterministic baseline or an MC-masked model).
    Single {
        config: uq_core::nn::ModelConfig,
        model: TrainedModel,
    },
    /// `samples` independently seeded members.
    Members(Ensemble),
}

/// A trained method with its full set of test-split predictive samples.
#[derive(Debug, Clone)]
pub struct PreparedMethod {
    pub method: Method,
    pub model_id: String,
    pub master_seed: u64,
    pub test_ids: Vec<usize>,
    pub test_labels: Vec<usize>,
    pub test_label_dists: Vec<LabelDistribution>,
    /// One entry per test sample, holding `samples` stochastic passes for
    /// MC methods, one per member for ensembles, one for deterministic.
    pub predictions: Vec<PredictiveSamples>,
    pub artifact: TrainedArtifact,
}

impl PreparedMethod {
    pub fn ensemble(&self) -> Option<&Ensemble> {
        match &self.artifact {
            TrainedArtifact::Members(e) => Some(e),
            TrainedArtifact::Single { .. } => None,
        }
    }
}

/// One sweep row: the three headline metrics at a given T.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t: usize,
    pub error: f64,
    pub nll: f64,
    pub ece: f64,
}

/// Per-method sweep table over T = 1..=samples.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub method: Method,
    pub model_id: String,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

fn model_id(config: &uq_core::nn::ModelConfig) -> String {
    let mut dims = vec![config.input_dim.to_string()];
    dims.extend(config.hidden_dims.iter().map(|d| d.to_string()));
    dims.push(config.num_classes.to_string());
    format!("mlp-{}", dims.join("x"))
}

fn training_examples<'a>(dataset: &'a Dataset) -> Result<Vec<Example<'a>>> {
    let split = dataset.split(Usage::Train);
    if split.is_empty() {
        return Err(Error::validation("training split is empty"));
    }
    Ok(split
        .into_iter()
        .map(|s| Example {
            features: &s.features,
            label: s.hard_label,
        })
        .collect())
}

/// Train whatever artifact `method` needs, without drawing predictions.
pub fn train_method(
    config: &ExperimentConfig,
    dataset: &Dataset,
    method: Method,
) -> Result<TrainedArtifact> {
    config.validate()?;
    let examples = training_examples(dataset)?;
    let model_config =
        config.model_config_for(method, dataset.feature_dim(), dataset.num_classes());
    let settings = TrainSettings {
        epochs: config.training.epochs,
        batch_size: config.training.batch_size,
    };
    match method {
        Method::DeepEnsemble => {
            let ensemble = train_ensemble(
                &model_config,
                &examples,
                config.samples,
                &settings,
                &config.optimizer_state()?,
            )?;
            Ok(TrainedArtifact::Members(ensemble))
        }
        _ => {
            let model = train(
                &model_config,
                &examples,
                &settings,
                config.optimizer_state()?,
            )?;
            Ok(TrainedArtifact::Single {
                config: model_config,
                model,
            })
        }
    }
}

/// Train `method` and draw its predictive samples on the test split.
///
/// MC sampling uses a per-input seed: the method's stream seed plus the
/// sample id, so inputs could be evaluated in any order (or in parallel)
/// without changing a digit.
pub fn prepare_method(
    config: &ExperimentConfig,
    dataset: &Dataset,
    method: Method,
) -> Result<PreparedMethod> {
    let artifact = train_method(config, dataset, method)?;
    let test_split = dataset.split(Usage::Test);
    if test_split.is_empty() {
        return Err(Error::validation("test split is empty"));
    }

    let mut predictions = Vec::with_capacity(test_split.len());
    let id_string;
    match &artifact {
        TrainedArtifact::Members(ensemble) => {
            id_string = model_id(ensemble.config());
            for sample in &test_split {
                predictions.push(ensemble_predict(ensemble, &sample.features)?);
            }
        }
        TrainedArtifact::Single {
            config: model_config,
            model,
        } => {
            id_string = model_id(model_config);
            for sample in &test_split {
                let prediction = match method {
                    Method::Deterministic => {
                        deterministic_predict(&model.params, &sample.features)?
                    }
                    Method::McDropout => mc_dropout_predict(
                        &model.params,
                        model_config,
                        &sample.features,
                        config.samples,
                        stream_seed(config.master_seed, streams::MC_DROPOUT)
                            .wrapping_add(sample.id as u64),
                    )?,
                    Method::McDropconnect => mc_dropconnect_predict(
                        &model.params,
                        model_config,
                        &sample.features,
                        config.samples,
                        stream_seed(config.master_seed, streams::MC_DROPCONNECT)
                            .wrapping_add(sample.id as u64),
                    )?,
                    Method::DeepEnsemble => unreachable!("handled above"),
                };
                predictions.push(prediction);
            }
        }
    }

    Ok(PreparedMethod {
        method,
        model_id: id_string,
        master_seed: config.master_seed,
        test_ids: test_split.iter().map(|s| s.id).collect(),
        test_labels: test_split.iter().map(|s| s.hard_label).collect(),
        test_label_dists: test_split.iter().map(|s| s.label_dist.clone()).collect(),
        predictions,
        artifact,
    })
}

/// Aggregated predictions at sample budget `t`: prefix means for stochastic
/// methods, the (T-independent) mean for the deterministic baseline.
pub fn predictions_at(prepared: &PreparedMethod, t: usize) -> Result<Vec<ProbabilityVector>> {
    prepared
        .predictions
        .iter()
        .map(|p| {
            if prepared.method == Method::Deterministic {
                Ok(p.mean().clone())
            } else {
                p.prefix_mean(t)
            }
        })
        .collect()
}

/// Prepare every configured method and sweep each over T = 1..=samples.
pub fn run_sweep(
    config: &ExperimentConfig,
    dataset: &Dataset,
) -> Result<Vec<(PreparedMethod, SweepResult)>> {
    config
        .methods
        .iter()
        .map(|&method| {
            let prepared = prepare_method(config, dataset, method)?;
            let sweep = sweep_from_prepared(&prepared, config.samples, config.ece_bins)?;
            Ok((prepared, sweep))
        })
        .collect()
}

/// Evaluate error/NLL/ECE at every T in 1..=max_t.
pub fn sweep_from_prepared(
    prepared: &PreparedMethod,
    max_t: usize,
    ece_bins: usize,
) -> Result<SweepResult> {
    if max_t == 0 {
        return Err(Error::validation("sweep needs max T >= 1"));
    }
    let mut rows = Vec::with_capacity(max_t);
    for t in 1..=max_t {
        let preds = predictions_at(prepared, t)?;
        let (report, _) = evaluate(&preds, &prepared.test_labels, ece_bins)?;
        rows.push(SweepRow {
            t,
            error: report.classification_error,
            nll: report.nll,
            ece: report.ece,
        });
    }
    Ok(SweepResult {
        method: prepared.method,
        model_id: prepared.model_id.clone(),
        seed: prepared.master_seed,
        rows,
    })
}

/// How to pick the operating point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatingPointCriterion {
    BestAccuracy,
    BestEce,
}

impl OperatingPointCriterion {
    pub fn name(&self) -> &'static str {
        match self {
            OperatingPointCriterion::BestAccuracy => "best-accuracy",
            OperatingPointCriterion::BestEce => "best-ece",
        }
    }
}

/// The T minimizing classification error (best accuracy) or ECE; ties go
/// to the smallest T.
pub fn select_operating_point(
    sweep: &SweepResult,
    criterion: OperatingPointCriterion,
) -> Result<usize> {
    if sweep.rows.is_empty() {
        return Err(Error::validation("cannot select from an empty sweep"));
    }
    let value = |row: &SweepRow| match criterion {
        OperatingPointCriterion::BestAccuracy => row.error,
        OperatingPointCriterion::BestEce => row.ece,
    };
    let mut best = &sweep.rows[0];
    for row in &sweep.rows[1..] {
        if value(row) < value(best) {
            best = row;
        }
    }
    Ok(best.t)
}

/// Calibration bins and reliability points for the prefix evaluation at `t`.
pub fn reliability_for(
    prepared: &PreparedMethod,
    t: usize,
    ece_bins: usize,
) -> Result<(CalibrationBins, Vec<(f64, f64)>)> {
    let preds = predictions_at(prepared, t)?;
    let (_, bins) = uq_core::metrics::ece(&preds, &prepared.test_labels, ece_bins)?;
    let curve = reliability_curve(&bins);
    Ok((bins, curve))
}
