//! Deep ensembles: N independently trained networks, averaged at prediction.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    load_model, save_model, train, Example, ModelConfig, ModelParams, OptimizerState, TrainSettings,
};
use crate::uncertainty::{Method, PredictiveSamples};

pub const ENSEMBLE_FORMAT_VERSION: u32 = 1;

/// N shape-identical members trained from pairwise-distinct seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    config: ModelConfig,
    member_seeds: Vec<u64>,
    members: Vec<ModelParams>,
}

impl Ensemble {
    /// Assemble an ensemble, enforcing N >= 1, pairwise-distinct seeds and
    /// shape-identical members.
    pub fn new(
        config: ModelConfig,
        member_seeds: Vec<u64>,
        members: Vec<ModelParams>,
    ) -> Result<Self> {
        config.validate()?;
        if members.is_empty() {
            return Err(Error::validation("an ensemble needs at least one member"));
        }
        if member_seeds.len() != members.len() {
            return Err(Error::validation(format!(
                "{} seeds for {} members",
                member_seeds.len(),
                members.len()
            )));
        }
        let mut sorted = member_seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation(
                "ensemble member seeds must be pairwise distinct",
            ));
        }
        for (i, m) in members.iter().enumerate() {
            if !m.matches_config(&config) {
                return Err(Error::dimension(format!(
                    "member {i} does not match the ensemble config"
                )));
            }
        }
        Ok(Self {
            config,
            member_seeds,
            members,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ModelParams] {
        &self.members
    }

    pub fn member_seeds(&self) -> &[u64] {
        &self.member_seeds
    }
}

/// Train N members that differ only in their RNG seed: member i uses
/// `config.seed + i` (wrapping), which initializes its weights, drives its
/// shuffles and, when the config requests masks, its mask draws.
pub fn train_ensemble(
    config: &ModelConfig,
    examples: &[Example<'_>],
    num_members: usize,
    settings: &TrainSettings,
    optimizer: &OptimizerState,
) -> Result<Ensemble> {
    let seeds: Vec<u64> = (0..num_members as u64)
        .map(|i| config.seed.wrapping_add(i))
        .collect();
    train_ensemble_with_seeds(config, examples, &seeds, settings, optimizer)
}

/// As [`train_ensemble`] but with explicit member seeds; duplicates are
/// rejected before any training starts.
pub fn train_ensemble_with_seeds(
    config: &ModelConfig,
    examples: &[Example<'_>],
    seeds: &[u64],
    settings: &TrainSettings,
    optimizer: &OptimizerState,
) -> Result<Ensemble> {
    config.validate()?;
    if seeds.is_empty() {
        return Err(Error::validation("an ensemble needs at least one member"));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::validation(
            "ensemble member seeds must be pairwise distinct",
        ));
    }

    let mut members = Vec::with_capacity(seeds.len());
    for (i, &seed) in seeds.iter().enumerate() {
        let mut member_config = config.clone();
        member_config.seed = seed;
        let trained = train(&member_config, examples, settings, optimizer.clone())
            .map_err(|e| Error::training(format!("ensemble member {i}: {e}")))?;
        members.push(trained.params);
    }
    Ensemble::new(config.clone(), seeds.to_vec(), members)
}

/// One deterministic (mask-free) probability vector per member, ordered by
/// member index, averaged into the ensemble prediction.
pub fn ensemble_predict(ensemble: &Ensemble, input: &[f64]) -> Result<PredictiveSamples> {
    let samples = ensemble
        .members()
        .iter()
        .map(|m| crate::nn::softmax(&m.forward(input, None)?))
        .collect::<Result<Vec<_>>>()?;
    PredictiveSamples::from_samples(Method::DeepEnsemble, samples)
}

#[derive(Serialize, Deserialize)]
struct EnsembleManifest {
    format_version: u32,
    n: usize,
    base_seed: u64,
    config: ModelConfig,
}

fn member_file_name(index: usize) -> String {
    format!("member_{index}.json")
}

/// Write `manifest.json` plus one model file per member into `dir`.
///
/// The manifest records the base seed, so only ensembles whose member seeds
/// are the contiguous run `base, base+1, ...` (the [`train_ensemble`]
/// layout) can be saved.
pub fn save_ensemble(ensemble: &Ensemble, dir: &Path) -> Result<()> {
    let base = ensemble.member_seeds()[0];
    for (i, &seed) in ensemble.member_seeds().iter().enumerate() {
        if seed != base.wrapping_add(i as u64) {
            return Err(Error::validation(
                "only ensembles with contiguous member seeds can be saved",
            ));
        }
    }
    fs::create_dir_all(dir)?;
    let manifest = EnsembleManifest {
        format_version: ENSEMBLE_FORMAT_VERSION,
        n: ensemble.len(),
        base_seed: base,
        config: ensemble.config().clone(),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    for (i, member) in ensemble.members().iter().enumerate() {
        let mut member_config = ensemble.config().clone();
        member_config.seed = ensemble.member_seeds()[i];
        save_model(&member_config, member, &dir.join(member_file_name(i)))?;
    }
    Ok(())
}

/// Load an ensemble directory written by [`save_ensemble`].
pub fn load_ensemble(dir: &Path) -> Result<Ensemble> {
    let manifest: EnsembleManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    if manifest.format_version != ENSEMBLE_FORMAT_VERSION {
        return Err(Error::format(format!(
            "unsupported ensemble format version {}, expected {ENSEMBLE_FORMAT_VERSION}",
            manifest.format_version
        )));
    }
    if manifest.n == 0 {
        return Err(Error::format("ensemble manifest declares zero members"));
    }
    let mut seeds = Vec::with_capacity(manifest.n);
    let mut members = Vec::with_capacity(manifest.n);
    for i in 0..manifest.n {
        let seed = manifest.base_seed.wrapping_add(i as u64);
        let (member_config, params) = load_model(&dir.join(member_file_name(i)))?;
        let mut expected = manifest.config.clone();
        expected.seed = seed;
        if member_config != expected {
            return Err(Error::format(format!(
                "member {i} config disagrees with the ensemble manifest"
            )));
        }
        seeds.push(seed);
        members.push(params);
    }
    Ensemble::new(manifest.config, seeds, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::DropMode;
    use crate::uncertainty::deterministic_predict;
    use crate::ProbabilityVector;

    fn blob_examples() -> Vec<(Vec<f64>, usize)> {
        (0..40)
            .map(|i| {
                let class = i % 2;
                let offset = 0.02 * (i / 2) as f64;
                let x = if class == 0 {
                    vec![-1.5 - offset, 0.3]
                } else {
                    vec![1.5 + offset, -0.3]
                };
                (x, class)
            })
            .collect()
    }

    fn as_examples(data: &[(Vec<f64>, usize)]) -> Vec<Example<'_>> {
        data.iter()
            .map(|(f, l)| Example {
                features: f,
                label: *l,
            })
            .collect()
    }

    fn quick_settings() -> TrainSettings {
        TrainSettings {
            epochs: 5,
            batch_size: 16,
        }
    }

    #[test]
    fn single_member_ensemble_equals_the_classical_network() {
        let data = blob_examples();
        let cfg = ModelConfig::new(2, vec![6], 10).with_classes(2);
        let ensemble = train_ensemble(
            &cfg,
            &as_examples(&data),
            1,
            &quick_settings(),
            &OptimizerState::default_adam(),
        )
        .unwrap();

        let single = train(
            &cfg,
            &as_examples(&data),
            &quick_settings(),
            OptimizerState::default_adam(),
        )
        .unwrap();

        let input = [0.2, 0.1];
        let ens = ensemble_predict(&ensemble, &input).unwrap();
        let det = deterministic_predict(&single.params, &input).unwrap();
        for (a, b) in ens.mean().as_slice().iter().zip(det.mean().as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let data = blob_examples();
        let cfg = ModelConfig::new(2, vec![4], 3).with_classes(2);
        let err = train_ensemble_with_seeds(
            &cfg,
            &as_examples(&data),
            &[7, 7],
            &quick_settings(),
            &OptimizerState::default_adam(),
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn fifteen_members_train_and_predict() {
        let data = blob_examples();
        let cfg = ModelConfig::new(2, vec![4], 50)
            .with_classes(2)
            .with_drop(DropMode::None, 0.0);
        let ensemble = train_ensemble(
            &cfg,
            &as_examples(&data),
            15,
            &TrainSettings {
                epochs: 2,
                batch_size: 16,
            },
            &OptimizerState::default_adam(),
        )
        .unwrap();
        assert_eq!(ensemble.len(), 15);
        assert!(ensemble.members().iter().all(|m| m.all_finite()));
        let pred = ensemble_predict(&ensemble, &[0.0, 0.0]).unwrap();
        assert_eq!(pred.num_samples(), 15);
    }

    #[test]
    fn identical_members_average_to_any_single_member() {
        let cfg = ModelConfig::new(2, vec![3], 1).with_classes(2);
        let params = ModelParams::init(&cfg).unwrap();
        let ensemble = Ensemble::new(
            cfg,
            vec![1, 2, 3],
            vec![params.clone(), params.clone(), params.clone()],
        )
        .unwrap();
        let pred = ensemble_predict(&ensemble, &[0.4, -0.4]).unwrap();
        assert_eq!(pred.mean(), &pred.samples()[0]);
    }

    #[test]
    fn opposed_one_hot_members_average_to_half() {
        let a = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        let b = ProbabilityVector::new(vec![0.0, 1.0]).unwrap();
        let pred = PredictiveSamples::from_samples(Method::DeepEnsemble, vec![a, b]).unwrap();
        assert_eq!(pred.mean().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn prefix_means_match_fresh_subensembles() {
        let data = blob_examples();
        let cfg = ModelConfig::new(2, vec![4], 30).with_classes(2);
        let ensemble = train_ensemble(
            &cfg,
            &as_examples(&data),
            6,
            &quick_settings(),
            &OptimizerState::default_adam(),
        )
        .unwrap();
        let input = [0.3, -0.2];
        let full = ensemble_predict(&ensemble, &input).unwrap();
        for k in 1..=6 {
            let sub = Ensemble::new(
                cfg.clone(),
                ensemble.member_seeds()[..k].to_vec(),
                ensemble.members()[..k].to_vec(),
            )
            .unwrap();
            let fresh = ensemble_predict(&sub, &input).unwrap();
            let prefix = full.prefix_mean(k).unwrap();
            for (a, b) in prefix.as_slice().iter().zip(fresh.mean().as_slice()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_round_trips_through_a_directory() {
        let data = blob_examples();
        let cfg = ModelConfig::new(2, vec![4], 8).with_classes(2);
        let ensemble = train_ensemble(
            &cfg,
            &as_examples(&data),
            3,
            &quick_settings(),
            &OptimizerState::default_adam(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ensemble(&ensemble, dir.path()).unwrap();
        let loaded = load_ensemble(dir.path()).unwrap();
        assert_eq!(ensemble, loaded);
    }

    #[test]
    fn training_failure_names_the_member() {
        // A label outside the class range fails inside member training; the
        // propagated error must carry the member index.
        let data = vec![(vec![0.0, 0.0], 5usize)];
        let cfg = ModelConfig::new(2, vec![4], 8).with_classes(2);
        let err = train_ensemble(
            &cfg,
            &as_examples(&data),
            2,
            &quick_settings(),
            &OptimizerState::default_adam(),
        );
        match err {
            Err(Error::Training(msg)) => assert!(msg.contains("member 0"), "message: {msg}"),
            other => panic!("expected a training error, got {other:?}"),
        }
    }
}
