//! The uncertain-sample report: for the top-k highest-entropy test inputs,
//! the ground-truth vote distribution and the ensemble's mean probabilities
//! at several member counts, with the predicted class named at each size.

use serde::Serialize;

use uq_core::data::{class_name, label_entropy_report, Dataset};
use uq_core::metrics::{rank_by_entropy, RankingEntry};
use uq_core::uncertainty::Method;
use uq_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::sweep::PreparedMethod;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct SizeProbabilities {
    pub size: usize,
    pub probabilities: Vec<f64>,
    pub predicted_class: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct UncertainEntry {
    pub id: usize,
    /// Entropy of the mean prediction at the largest requested size, nats.
    pub entropy: f64,
    pub label_votes: Vec<u32>,
    pub label_probabilities: Vec<f64>,
    pub true_class: String,
    pub per_size: Vec<SizeProbabilities>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelEntropySummary {
    pub mean: f64,
    pub max: f64,
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UncertainReport {
    pub format_version: u32,
    pub method: String,
    pub master_seed: u64,
    pub sizes: Vec<usize>,
    pub top_k: usize,
    pub entries: Vec<UncertainEntry>,
    /// Dataset-side aleatoric uncertainty: entropy of the crowd labels.
    pub label_entropy: LabelEntropySummary,
}

/// Rank the test split by predictive entropy at the largest requested
/// ensemble size and tabulate the top-k samples across all sizes. Smaller
/// sizes reuse member prefixes of the same trained ensemble.
pub fn report_uncertain(
    config: &ExperimentConfig,
    dataset: &Dataset,
    prepared: &PreparedMethod,
) -> Result<UncertainReport> {
    let ensemble = prepared
        .ensemble()
        .ok_or_else(|| Error::validation("the uncertain-sample report needs an ensemble method"))?;
    let sizes = &config.report_sizes;
    let largest = *sizes.iter().max().expect("validated non-empty");
    if largest > ensemble.len() {
        return Err(Error::validation(format!(
            "requested ensemble size {largest} exceeds the {} trained members",
            ensemble.len()
        )));
    }
    if config.top_k > prepared.predictions.len() {
        return Err(Error::validation(format!(
            "top_k = {} exceeds the {} test samples",
            config.top_k,
            prepared.predictions.len()
        )));
    }

    let num_classes = dataset.num_classes();
    let ranking_input: Vec<RankingEntry> = prepared
        .predictions
        .iter()
        .enumerate()
        .map(|(i, prediction)| {
            Ok(RankingEntry {
                id: prepared.test_ids[i],
                mean: prediction.prefix_mean(largest)?,
                label_dist: prepared.test_label_dists[i].clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ranking = rank_by_entropy(&ranking_input, config.top_k)?;

    let mut entries = Vec::with_capacity(ranking.entries.len());
    for ranked in &ranking.entries {
        let position = prepared
            .test_ids
            .iter()
            .position(|&id| id == ranked.id)
            .expect("ranked id came from test_ids");
        let prediction = &prepared.predictions[position];

        let per_size = sizes
            .iter()
            .map(|&size| {
                let mean = prediction.prefix_mean(size)?;
                Ok(SizeProbabilities {
                    size,
                    predicted_class: class_name(mean.argmax(), num_classes),
                    probabilities: mean.as_slice().to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        entries.push(UncertainEntry {
            id: ranked.id,
            entropy: ranked.entropy,
            label_votes: ranked.label_dist.counts().to_vec(),
            label_probabilities: ranked.label_dist.probabilities().as_slice().to_vec(),
            true_class: class_name(ranked.label_dist.hard_label(), num_classes),
            per_size,
        });
    }

    let label_entropy = label_entropy_report(dataset);
    Ok(UncertainReport {
        format_version: REPORT_FORMAT_VERSION,
        method: Method::DeepEnsemble.name().to_string(),
        master_seed: prepared.master_seed,
        sizes: sizes.clone(),
        top_k: config.top_k,
        entries,
        label_entropy: LabelEntropySummary {
            mean: label_entropy.mean,
            max: label_entropy.max,
            histogram: label_entropy.histogram,
        },
    })
}
