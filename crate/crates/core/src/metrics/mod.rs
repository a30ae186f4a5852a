//! Evaluation battery: classification error, NLL, expected calibration
//! error with reliability-diagram data, predictive entropy, entropy ranking
//! and soft-label divergence.
//!
//! All operations are pure functions over probability vectors; natural
//! logarithms throughout, so NLL and entropy are in nats.

use serde::Serialize;

use crate::data::LabelDistribution;
use crate::error::{Error, Result};
use crate::nn::PROB_EPSILON;
use crate::prob::ProbabilityVector;

/// Default number of equal-width confidence bins for calibration.
pub const DEFAULT_ECE_BINS: usize = 15;

/// Fraction of samples whose argmax prediction misses the hard label.
/// Argmax ties break to the lowest class index.
pub fn classification_error(
    predictions: &[ProbabilityVector],
    hard_labels: &[usize],
) -> Result<f64> {
    check_paired(predictions, hard_labels)?;
    let wrong = predictions
        .iter()
        .zip(hard_labels)
        .filter(|(p, &l)| p.argmax() != l)
        .count();
    Ok(wrong as f64 / predictions.len() as f64)
}

/// Mean `-ln p(true class)`, clamped below at 1e-12 before the log.
pub fn nll(predictions: &[ProbabilityVector], hard_labels: &[usize]) -> Result<f64> {
    check_paired(predictions, hard_labels)?;
    let mut total = 0.0;
    for (p, &l) in predictions.iter().zip(hard_labels) {
        if l >= p.num_classes() {
            return Err(Error::validation(format!(
                "label {l} out of range for {} classes",
                p.num_classes()
            )));
        }
        total += -p[l].max(PROB_EPSILON).ln();
    }
    Ok(total / predictions.len() as f64)
}

fn check_paired(predictions: &[ProbabilityVector], hard_labels: &[usize]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::validation("no predictions to evaluate"));
    }
    if predictions.len() != hard_labels.len() {
        return Err(Error::dimension(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            hard_labels.len()
        )));
    }
    Ok(())
}

/// Statistics of one confidence bin. `mean_confidence` and `accuracy` are
/// `None` for empty bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(rename = "conf")]
    pub mean_confidence: Option<f64>,
    #[serde(rename = "acc")]
    pub accuracy: Option<f64>,
}

/// An equal-width partition of [0, 1] into M confidence bins.
///
/// A confidence exactly on an interior edge belongs to the higher bin; the
/// top bin is closed on the right so a confidence of 1.0 lands in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBins {
    pub num_bins: usize,
    pub total: usize,
    pub bins: Vec<BinStats>,
}

/// Expected calibration error with its binning.
///
/// Confidence is the max entry of each prediction; a sample counts as
/// accurate when its argmax equals the hard label. ECE sums
/// `(count_m / n) * |acc_m - conf_m|` over non-empty bins.
pub fn ece(
    predictions: &[ProbabilityVector],
    hard_labels: &[usize],
    num_bins: usize,
) -> Result<(f64, CalibrationBins)> {
    check_paired(predictions, hard_labels)?;
    if num_bins == 0 {
        return Err(Error::validation("ece needs at least one bin"));
    }

    let mut counts = vec![0usize; num_bins];
    let mut conf_sums = vec![0.0f64; num_bins];
    let mut correct = vec![0usize; num_bins];

    for (p, &label) in predictions.iter().zip(hard_labels) {
        let predicted = p.argmax();
        let confidence = p[predicted];
        let mut bin = (confidence * num_bins as f64).floor() as usize;
        if bin >= num_bins {
            bin = num_bins - 1;
        }
        counts[bin] += 1;
        conf_sums[bin] += confidence;
        if predicted == label {
            correct[bin] += 1;
        }
    }

    let n = predictions.len() as f64;
    let mut total_ece = 0.0;
    let mut bins = Vec::with_capacity(num_bins);
    for m in 0..num_bins {
        let lo = m as f64 / num_bins as f64;
        let hi = (m + 1) as f64 / num_bins as f64;
        if counts[m] == 0 {
            bins.push(BinStats {
                lo,
                hi,
                count: 0,
                mean_confidence: None,
                accuracy: None,
            });
            continue;
        }
        let conf = conf_sums[m] / counts[m] as f64;
        let acc = correct[m] as f64 / counts[m] as f64;
        total_ece += counts[m] as f64 / n * (acc - conf).abs();
        bins.push(BinStats {
            lo,
            hi,
            count: counts[m],
            mean_confidence: Some(conf),
            accuracy: Some(acc),
        });
    }

    Ok((
        total_ece,
        CalibrationBins {
            num_bins,
            total: predictions.len(),
            bins,
        },
    ))
}

/// `(mean confidence, accuracy)` per non-empty bin, in bin order — the
/// points of a reliability diagram against the identity diagonal.
pub fn reliability_curve(bins: &CalibrationBins) -> Vec<(f64, f64)> {
    bins.bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| {
            (
                b.mean_confidence.expect("non-empty bin"),
                b.accuracy.expect("non-empty bin"),
            )
        })
        .collect()
}

/// Shannon entropy `H(p) = -sum p_i ln p_i` in nats, with `0 ln 0 = 0`.
/// Ranges from 0 (one-hot) to ln K (uniform).
pub fn predictive_entropy(p: &ProbabilityVector) -> f64 {
    p.as_slice()
        .iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum()
}

/// Input row for [`rank_by_entropy`]: one evaluated sample with its
/// aggregated prediction and ground-truth label distribution.
#[derive(Debug, Clone)]
pub struct RankingEntry {
    pub id: usize,
    pub mean: ProbabilityVector,
    pub label_dist: LabelDistribution,
}

/// One row of an uncertainty ranking.
#[derive(Debug, Clone)]
pub struct RankedSample {
    pub id: usize,
    pub entropy: f64,
    pub mean: ProbabilityVector,
    pub predicted_class: usize,
    pub label_dist: LabelDistribution,
}

/// Samples sorted by descending predictive entropy of the mean prediction.
#[derive(Debug, Clone)]
pub struct UncertaintyRanking {
    pub entries: Vec<RankedSample>,
}

/// Top-k samples by entropy of the mean probability vector, ties broken by
/// ascending sample id. `k = 0` yields an empty ranking.
pub fn rank_by_entropy(entries: &[RankingEntry], k: usize) -> Result<UncertaintyRanking> {
    if k > entries.len() {
        return Err(Error::validation(format!(
            "k = {k} exceeds the {} evaluated samples",
            entries.len()
        )));
    }
    let mut ranked: Vec<RankedSample> = entries
        .iter()
        .map(|e| RankedSample {
            id: e.id,
            entropy: predictive_entropy(&e.mean),
            mean: e.mean.clone(),
            predicted_class: e.mean.argmax(),
            label_dist: e.label_dist.clone(),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.entropy
            .total_cmp(&a.entropy)
            .then_with(|| a.id.cmp(&b.id))
    });
    ranked.truncate(k);
    Ok(UncertaintyRanking { entries: ranked })
}

/// `KL(labels || prediction)` in nats: how far the predicted probabilities
/// sit from the crowd-vote distribution. Prediction entries are clamped at
/// 1e-12 inside the log; zero-mass label entries contribute nothing.
pub fn soft_label_divergence(
    prediction: &ProbabilityVector,
    labels: &LabelDistribution,
) -> Result<f64> {
    let label_probs = labels.probabilities();
    if prediction.num_classes() != label_probs.num_classes() {
        return Err(Error::dimension(format!(
            "prediction has {} classes, labels have {}",
            prediction.num_classes(),
            label_probs.num_classes()
        )));
    }
    let mut kl = 0.0;
    for (&l, &p) in label_probs.as_slice().iter().zip(prediction.as_slice()) {
        if l > 0.0 {
            kl += l * (l.ln() - p.max(PROB_EPSILON).ln());
        }
    }
    Ok(kl)
}

/// The summary metrics of one evaluation pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(rename = "error")]
    pub classification_error: f64,
    pub nll: f64,
    pub ece: f64,
    /// Mean predictive entropy over the evaluated predictions, in nats.
    pub mean_entropy: f64,
}

/// Compute the full battery in one call.
pub fn evaluate(
    predictions: &[ProbabilityVector],
    hard_labels: &[usize],
    num_bins: usize,
) -> Result<(MetricsReport, CalibrationBins)> {
    let error = classification_error(predictions, hard_labels)?;
    let nll_value = nll(predictions, hard_labels)?;
    let (ece_value, bins) = ece(predictions, hard_labels, num_bins)?;
    let mean_entropy =
        predictions.iter().map(predictive_entropy).sum::<f64>() / predictions.len() as f64;
    Ok((
        MetricsReport {
            classification_error: error,
            nll: nll_value,
            ece: ece_value,
            mean_entropy,
        },
        bins,
    ))
}

/// JSON document for one evaluation:
/// `{error, nll, ece, mean_entropy, bins: [{lo, hi, count, conf, acc}]}`.
#[derive(Debug, Serialize)]
pub struct ReportDocument<'a> {
    #[serde(flatten)]
    pub metrics: &'a MetricsReport,
    pub bins: &'a [BinStats],
}

pub fn report_to_json(metrics: &MetricsReport, bins: &CalibrationBins) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ReportDocument {
        metrics,
        bins: &bins.bins,
    })?)
}
