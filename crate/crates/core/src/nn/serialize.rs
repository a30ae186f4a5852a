//! Versioned JSON model files.
//!
//! Schema: `{format_version, config, layers: [{weights, biases}]}` with
//! weights flattened row-major; shapes are implied by the config. Finite
//! doubles survive a save/load round trip value-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::linalg::Matrix;
use crate::nn::params::{Layer, ModelParams};
use crate::nn::ModelConfig;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    config: ModelConfig,
    layers: Vec<LayerFile>,
}

pub fn model_to_json(config: &ModelConfig, params: &ModelParams) -> Result<String> {
    config.validate()?;
    if !params.matches_config(config) {
        return Err(Error::dimension(
            "parameter shapes do not match the config being saved",
        ));
    }
    if !params.all_finite() {
        return Err(Error::validation("refusing to save non-finite parameters"));
    }
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        config: config.clone(),
        layers: params
            .layers()
            .iter()
            .map(|l| LayerFile {
                weights: l.weights.data().to_vec(),
                biases: l.biases.clone(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn model_from_json(json: &str) -> Result<(ModelConfig, ModelParams)> {
    let file: ModelFile = serde_json::from_str(json)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::format(format!(
            "unsupported model format version {}, expected {MODEL_FORMAT_VERSION}",
            file.format_version
        )));
    }
    file.config.validate()?;
    let dims = file.config.layer_dims();
    if file.layers.len() != dims.len() {
        return Err(Error::format(format!(
            "model file has {} layers, config implies {}",
            file.layers.len(),
            dims.len()
        )));
    }
    let layers = file
        .layers
        .into_iter()
        .zip(dims)
        .enumerate()
        .map(|(i, (lf, (in_dim, out_dim)))| {
            if lf.weights.len() != in_dim * out_dim {
                return Err(Error::format(format!(
                    "layer {i}: {} weights, expected {}",
                    lf.weights.len(),
                    in_dim * out_dim
                )));
            }
            if lf.biases.len() != out_dim {
                return Err(Error::format(format!(
                    "layer {i}: {} biases, expected {out_dim}",
                    lf.biases.len()
                )));
            }
            Ok(Layer {
                weights: Matrix::from_row_major(out_dim, in_dim, lf.weights),
                biases: lf.biases,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((file.config, ModelParams::from_layers(layers)?))
}

pub fn save_model(config: &ModelConfig, params: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(config, params)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(ModelConfig, ModelParams)> {
    model_from_json(&fs::read_to_string(path)?)
}
