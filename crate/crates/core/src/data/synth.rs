//! Synthetic high-aleatoric dataset generator.
//!
//! Class-conditional Gaussian blobs with unit variance: class k's mean sits
//! at `SEPARATION * e_k` (the k-th standard basis vector), so the class
//! means form the vertices of a scaled simplex and every pair is
//! equidistant. Features are quantized onto the 0-255 grid that the
//! canonical CSV stores, then scaled to [0, 1], so a generated dataset
//! survives a CSV round trip exactly.
//!
//! Label votes model crowd ambiguity: with probability `flip_rate` a sample
//! records a 6/4 vote split between its true class and a uniformly chosen
//! confuser class; otherwise all 10 votes land on the true class.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, LabelDistribution, LabeledSample, Usage};
use crate::error::{Error, Result};

/// Distance of each class mean from the origin, in feature-noise sigmas.
/// Pairwise mean distance is `SEPARATION * sqrt(2)`, close enough for real
/// class confusion: the generator exists to model high-ambiguity data.
pub const SEPARATION: f64 = 2.0;

/// Range of raw feature values mapped onto the 0-255 pixel grid; four
/// sigmas of slack on both sides of the blob means.
const GRID_LO: f64 = -4.0;
const GRID_HI: f64 = SEPARATION + 4.0;

const VOTES_PER_SAMPLE: u32 = 10;
const FLIP_TRUE_VOTES: u32 = 6;
const FLIP_CONFUSER_VOTES: u32 = 4;

/// Generate `num_samples` labelled samples.
///
/// Per sample, draws are consumed in a fixed order — class, `input_dim`
/// feature normals, flip decision, confuser class (flipped samples only) —
/// so a seed pins the dataset exactly. Split assignment is round-robin:
/// ids with `id % 10 == 8` go to validation, `id % 10 == 9` to test, the
/// rest to training (80/10/10).
pub fn synth_aleatoric(
    num_samples: usize,
    num_classes: usize,
    input_dim: usize,
    flip_rate: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_samples == 0 {
        return Err(Error::validation("num_samples must be >= 1"));
    }
    if num_classes < 2 {
        return Err(Error::validation("num_classes must be >= 2"));
    }
    if input_dim < num_classes {
        return Err(Error::validation(format!(
            "input_dim {input_dim} must be >= num_classes {num_classes} so class means stay distinct"
        )));
    }
    if !(0.0..1.0).contains(&flip_rate) || !flip_rate.is_finite() {
        return Err(Error::validation(format!(
            "flip_rate must be in [0, 1), got {flip_rate}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal is valid");

    let mut samples = Vec::with_capacity(num_samples);
    for id in 0..num_samples {
        let class = rng.gen_range(0..num_classes);

        let mut features = Vec::with_capacity(input_dim);
        for dim in 0..input_dim {
            let mean = if dim == class { SEPARATION } else { 0.0 };
            let raw: f64 = mean + noise.sample(&mut rng);
            let byte = ((raw - GRID_LO) / (GRID_HI - GRID_LO) * 255.0)
                .round()
                .clamp(0.0, 255.0);
            features.push(byte / 255.0);
        }

        let mut counts = vec![0u32; num_classes];
        if rng.gen::<f64>() < flip_rate {
            let confuser = {
                let pick = rng.gen_range(0..num_classes - 1);
                if pick >= class {
                    pick + 1
                } else {
                    pick
                }
            };
            counts[class] = FLIP_TRUE_VOTES;
            counts[confuser] = FLIP_CONFUSER_VOTES;
        } else {
            counts[class] = VOTES_PER_SAMPLE;
        }

        let usage = match id % 10 {
            8 => Usage::Validation,
            9 => Usage::Test,
            _ => Usage::Train,
        };
        samples.push(LabeledSample::new(
            id,
            features,
            LabelDistribution::from_counts(counts)?,
            usage,
        ));
    }

    Dataset::new(samples, num_classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flip_rate_gives_one_hot_labels() {
        let ds = synth_aleatoric(200, 4, 8, 0.0, 3).unwrap();
        for s in ds.samples() {
            let nonzero = s.label_dist.counts().iter().filter(|&&c| c > 0).count();
            assert_eq!(nonzero, 1);
            assert_eq!(s.label_dist.counts()[s.hard_label], VOTES_PER_SAMPLE);
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = synth_aleatoric(100, 8, 16, 0.3, 9).unwrap();
        let b = synth_aleatoric(100, 8, 16, 0.3, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_aleatoric(100, 8, 16, 0.3, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn flip_fraction_matches_binomial_expectation() {
        let n = 10_000;
        let ds = synth_aleatoric(n, 8, 16, 0.3, 21).unwrap();
        let two_class = ds
            .samples()
            .iter()
            .filter(|s| s.label_dist.counts().iter().filter(|&&c| c > 0).count() == 2)
            .count();
        let frac = two_class as f64 / n as f64;
        assert!(
            (frac - 0.3).abs() < 0.015,
            "two-class fraction {frac} outside 0.3 +/- 0.015"
        );
    }

    #[test]
    fn flipped_votes_keep_the_true_class_majority() {
        let ds = synth_aleatoric(500, 4, 8, 0.5, 2).unwrap();
        for s in ds.samples() {
            let counts = s.label_dist.counts();
            if counts.iter().filter(|&&c| c > 0).count() == 2 {
                assert!(counts.contains(&FLIP_TRUE_VOTES));
                assert!(counts.contains(&FLIP_CONFUSER_VOTES));
                assert_eq!(counts[s.hard_label], FLIP_TRUE_VOTES);
            }
        }
    }

    #[test]
    fn class_priors_are_uniform() {
        let n = 10_000;
        let k = 8;
        let ds = synth_aleatoric(n, k, 16, 0.0, 5).unwrap();
        let mut per_class = vec![0usize; k];
        for s in ds.samples() {
            per_class[s.hard_label] += 1;
        }
        let expected = n as f64 / k as f64;
        let se = (n as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt();
        for (class, &count) in per_class.iter().enumerate() {
            assert!(
                (count as f64 - expected).abs() < 3.0 * se,
                "class {class} count {count} outside 3 SE of {expected}"
            );
        }
    }

    #[test]
    fn features_sit_on_the_byte_grid_inside_unit_interval() {
        let ds = synth_aleatoric(50, 4, 9, 0.2, 7).unwrap();
        for s in ds.samples() {
            for &f in &s.features {
                assert!((0.0..=1.0).contains(&f));
                let byte = f * 255.0;
                assert!((byte - byte.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn split_assignment_is_80_10_10() {
        let ds = synth_aleatoric(1000, 4, 8, 0.1, 4).unwrap();
        assert_eq!(ds.split(Usage::Train).len(), 800);
        assert_eq!(ds.split(Usage::Validation).len(), 100);
        assert_eq!(ds.split(Usage::Test).len(), 100);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(synth_aleatoric(0, 4, 8, 0.1, 0).is_err());
        assert!(synth_aleatoric(10, 1, 8, 0.1, 0).is_err());
        assert!(synth_aleatoric(10, 4, 2, 0.1, 0).is_err());
        assert!(synth_aleatoric(10, 4, 8, 1.0, 0).is_err());
        assert!(synth_aleatoric(10, 4, 8, -0.1, 0).is_err());
    }
}
