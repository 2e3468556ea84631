use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Head, MlpModel};
use crate::error::{Error, Result};
use crate::preprocess::Scaler;
use crate::target::TargetKind;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerFile {
    /// Row-major (fan_in, fan_out).
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    layer_sizes: Vec<usize>,
    activation: Activation,
    head: Head,
    target_kind: TargetKind,
    physics_weight: Option<f64>,
    seed: u64,
    scaler: Scaler,
    layers: Vec<LayerFile>,
}

pub fn model_to_json(model: &MlpModel) -> Result<String> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        layer_sizes: model.layer_sizes.clone(),
        activation: model.activation,
        head: model.head,
        target_kind: model.target_kind,
        physics_weight: model.physics_weight,
        seed: model.seed,
        scaler: model.scaler,
        layers: model
            .weights
            .iter()
            .zip(&model.biases)
            .map(|(w, b)| LayerFile {
                weights: w.rows().into_iter().map(|r| r.to_vec()).collect(),
                biases: b.to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn model_from_json(text: &str, origin: &Path) -> Result<MlpModel> {
    let malformed = |reason: String| Error::Malformed {
        path: origin.to_path_buf(),
        reason,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| malformed("missing format_version".into()))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version as u32,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;

    let sizes = &file.layer_sizes;
    if sizes.len() < 3 || file.layers.len() != sizes.len() - 1 {
        return Err(Error::InvalidShape(format!(
            "{} layers stored for layer sizes {sizes:?}",
            file.layers.len()
        )));
    }
    if file.head == Head::Evidential && sizes[sizes.len() - 1] != 4 {
        return Err(Error::InvalidShape("evidential head needs output width 4".into()));
    }
    let mut weights = Vec::with_capacity(file.layers.len());
    let mut biases = Vec::with_capacity(file.layers.len());
    for (l, layer) in file.layers.into_iter().enumerate() {
        let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
        if layer.weights.len() != fan_in
            || layer.weights.iter().any(|r| r.len() != fan_out)
            || layer.biases.len() != fan_out
        {
            return Err(Error::InvalidShape(format!("layer {l} does not match ({fan_in}, {fan_out})")));
        }
        let flat: Vec<f64> = layer.weights.into_iter().flatten().collect();
        weights.push(Array2::from_shape_vec((fan_in, fan_out), flat).expect("checked shape"));
        biases.push(Array1::from(layer.biases));
    }
    let model = MlpModel {
        layer_sizes: file.layer_sizes,
        activation: file.activation,
        head: file.head,
        weights,
        biases,
        scaler: file.scaler,
        target_kind: file.target_kind,
        physics_weight: file.physics_weight,
        seed: file.seed,
    };
    if !model.is_finite() {
        return Err(malformed("non-finite weight".into()));
    }
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = model_to_json(model)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text, path)
}
