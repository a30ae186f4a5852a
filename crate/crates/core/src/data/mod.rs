//! Dataset types: crowd-vote label distributions, labelled samples with
//! flattened pixel features, split membership, and label-entropy summaries.

mod ferplus;
mod synth;

use crate::error::{Error, Result};
use crate::metrics::predictive_entropy;
use crate::prob::ProbabilityVector;

pub use ferplus::{
    load_ferplus_csv, load_ferplus_reader, write_canonical_csv, write_canonical_writer,
    CsvLoadOutcome, CANONICAL_HEADER,
};
pub use synth::synth_aleatoric;

/// The eight emotion classes of the crowd-labelled format, in column order.
pub const FERPLUS_CLASSES: [&str; 8] = [
    "neutral",
    "happiness",
    "surprise",
    "sadness",
    "anger",
    "disgust",
    "fear",
    "contempt",
];

/// Human-readable class name: the emotion list for 8-class data, a generic
/// `class_<i>` otherwise.
pub fn class_name(index: usize, num_classes: usize) -> String {
    if num_classes == FERPLUS_CLASSES.len() && index < num_classes {
        FERPLUS_CLASSES[index].to_string()
    } else {
        format!("class_{index}")
    }
}

/// Crowd-vote counts per class plus their normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    counts: Vec<u32>,
    probabilities: ProbabilityVector,
}

impl LabelDistribution {
    /// At least one vote must remain across the classes.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::validation("label distribution needs >= 1 class"));
        }
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total == 0 {
            return Err(Error::validation(
                "label distribution has zero retained votes",
            ));
        }
        let probabilities =
            ProbabilityVector::new(counts.iter().map(|&c| c as f64 / total as f64).collect())?;
        Ok(Self {
            counts,
            probabilities,
        })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.probabilities
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    /// Majority-vote class; ties break to the lowest index.
    pub fn hard_label(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate().skip(1) {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Majority-vote hard label of a distribution (lowest-index tie-break).
pub fn derive_hard_label(dist: &LabelDistribution) -> usize {
    dist.hard_label()
}

/// Which split a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Usage {
    Train,
    Validation,
    Test,
}

/// One sample: flattened grayscale pixels in [0, 1], its crowd-vote label
/// distribution and the derived hard label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: usize,
    pub features: Vec<f64>,
    pub label_dist: LabelDistribution,
    pub hard_label: usize,
    pub usage: Usage,
}

impl LabeledSample {
    pub fn new(id: usize, features: Vec<f64>, label_dist: LabelDistribution, usage: Usage) -> Self {
        let hard_label = label_dist.hard_label();
        Self {
            id,
            features,
            label_dist,
            hard_label,
            usage,
        }
    }
}

/// An ordered, immutable collection of samples with a shared class count
/// and feature length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>, num_classes: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("dataset must be non-empty"));
        }
        let feature_dim = samples[0].features.len();
        let mut seen = std::collections::HashSet::with_capacity(samples.len());
        for s in &samples {
            if !seen.insert(s.id) {
                return Err(Error::validation(format!("duplicate sample id {}", s.id)));
            }
            if s.features.len() != feature_dim {
                return Err(Error::dimension(format!(
                    "sample {} has {} features, expected {feature_dim}",
                    s.id,
                    s.features.len()
                )));
            }
            if s.label_dist.num_classes() != num_classes {
                return Err(Error::dimension(format!(
                    "sample {} has {} label classes, expected {num_classes}",
                    s.id,
                    s.label_dist.num_classes()
                )));
            }
            if s.hard_label != s.label_dist.hard_label() {
                return Err(Error::validation(format!(
                    "sample {} hard label disagrees with its distribution",
                    s.id
                )));
            }
        }
        Ok(Self {
            samples,
            num_classes,
        })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.samples[0].features.len()
    }

    /// Samples of one split, in dataset order.
    pub fn split(&self, usage: Usage) -> Vec<&LabeledSample> {
        self.samples.iter().filter(|s| s.usage == usage).collect()
    }
}

/// Per-sample label entropies with summary statistics.
///
/// The histogram has ten equal-width bins over [0, ln K], the last bin
/// closed on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEntropyReport {
    /// `(sample id, entropy in nats)` in dataset order.
    pub entropies: Vec<(usize, f64)>,
    pub mean: f64,
    pub max: f64,
    pub histogram: Vec<usize>,
}

pub const LABEL_ENTROPY_HISTOGRAM_BINS: usize = 10;

/// Entropy of every sample's label distribution: the dataset-side view of
/// aleatoric uncertainty.
pub fn label_entropy_report(dataset: &Dataset) -> LabelEntropyReport {
    let max_entropy = (dataset.num_classes() as f64).ln();
    let entropies: Vec<(usize, f64)> = dataset
        .samples()
        .iter()
        .map(|s| (s.id, predictive_entropy(s.label_dist.probabilities())))
        .collect();
    let mean = entropies.iter().map(|(_, h)| h).sum::<f64>() / entropies.len() as f64;
    let max = entropies.iter().map(|(_, h)| *h).fold(0.0, f64::max);

    let bins = LABEL_ENTROPY_HISTOGRAM_BINS;
    let mut histogram = vec![0usize; bins];
    for &(_, h) in &entropies {
        let mut idx = (h / max_entropy * bins as f64).floor() as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        histogram[idx] += 1;
    }

    LabelEntropyReport {
        entropies,
        mean,
        max,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_label_from_votes() {
        let d = LabelDistribution::from_counts(vec![0, 10, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(derive_hard_label(&d), 1);

        let tie = LabelDistribution::from_counts(vec![5, 5, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(derive_hard_label(&tie), 0);

        let d = LabelDistribution::from_counts(vec![1, 2, 3, 4, 0, 0, 0, 0]).unwrap();
        assert_eq!(derive_hard_label(&d), 3);
    }

    #[test]
    fn distribution_normalizes() {
        let d = LabelDistribution::from_counts(vec![2, 8, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        assert!((d.probabilities()[0] - 0.2).abs() < 1e-12);
        assert!((d.probabilities()[1] - 0.8).abs() < 1e-12);
        let sum: f64 = d.probabilities().as_slice().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_votes_rejected() {
        assert!(LabelDistribution::from_counts(vec![0, 0, 0]).is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_ids_and_ragged_features() {
        let dist = LabelDistribution::from_counts(vec![1, 0]).unwrap();
        let a = LabeledSample::new(0, vec![0.0; 4], dist.clone(), Usage::Train);
        let b = LabeledSample::new(0, vec![0.0; 4], dist.clone(), Usage::Test);
        assert!(Dataset::new(vec![a.clone(), b], 2).is_err());

        let c = LabeledSample::new(1, vec![0.0; 5], dist, Usage::Test);
        assert!(Dataset::new(vec![a, c], 2).is_err());
    }

    #[test]
    fn splits_are_disjoint_and_exhaustive() {
        let dist = LabelDistribution::from_counts(vec![1, 0]).unwrap();
        let samples: Vec<LabeledSample> = (0..10)
            .map(|i| {
                let usage = match i % 3 {
                    0 => Usage::Train,
                    1 => Usage::Validation,
                    _ => Usage::Test,
                };
                LabeledSample::new(i, vec![0.1; 4], dist.clone(), usage)
            })
            .collect();
        let ds = Dataset::new(samples, 2).unwrap();
        let total = ds.split(Usage::Train).len()
            + ds.split(Usage::Validation).len()
            + ds.split(Usage::Test).len();
        assert_eq!(total, ds.len());
    }

    #[test]
    fn label_entropy_hand_values() {
        let one_hot = LabelDistribution::from_counts(vec![10, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let samples: Vec<LabeledSample> = (0..4)
            .map(|i| LabeledSample::new(i, vec![0.0; 4], one_hot.clone(), Usage::Train))
            .collect();
        let ds = Dataset::new(samples, 8).unwrap();
        assert_eq!(label_entropy_report(&ds).mean, 0.0);

        let uniform = LabelDistribution::from_counts(vec![1; 8]).unwrap();
        let samples: Vec<LabeledSample> = (0..4)
            .map(|i| LabeledSample::new(i, vec![0.0; 4], uniform.clone(), Usage::Train))
            .collect();
        let ds = Dataset::new(samples, 8).unwrap();
        let report = label_entropy_report(&ds);
        assert!((report.mean - (8.0f64).ln()).abs() < 1e-12);
        assert_eq!(report.histogram[LABEL_ENTROPY_HISTOGRAM_BINS - 1], 4);

        // Two one-hot + two even two-way splits: mean = ln 2 / 2.
        let even = LabelDistribution::from_counts(vec![5, 5, 0, 0, 0, 0, 0, 0]).unwrap();
        let samples = vec![
            LabeledSample::new(0, vec![0.0; 4], one_hot.clone(), Usage::Train),
            LabeledSample::new(1, vec![0.0; 4], one_hot, Usage::Train),
            LabeledSample::new(2, vec![0.0; 4], even.clone(), Usage::Train),
            LabeledSample::new(3, vec![0.0; 4], even, Usage::Train),
        ];
        let ds = Dataset::new(samples, 8).unwrap();
        let report = label_entropy_report(&ds);
        let want = std::f64::consts::LN_2 / 2.0;
        assert!((report.mean - want).abs() < 1e-12);
        assert!((report.mean - 0.346574).abs() < 1e-6);
        assert!((report.max - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn class_names() {
        assert_eq!(class_name(1, 8), "happiness");
        assert_eq!(class_name(7, 8), "contempt");
        assert_eq!(class_name(2, 4), "class_2");
    }
}
