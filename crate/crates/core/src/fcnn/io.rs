//! JSON model files.
//!
//! ```json
//! {"version":1,"head":"softmax3","activations":["tanh","linear"],
//!  "layers":[{"rows":8,"cols":8,"w":[...],"b":[...]}, ...],
//!  "norm":{"max_abs_x":12,"max_abs_y":9},"meta":{...}}
//! ```
//!
//! Floats are written in shortest round-trip form, so a reload is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Activation, FcnnModel, Head, Layer, ModelMeta};
use crate::error::{Error, Result};
use crate::neighborhood::NormalizationConstants;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize)]
struct ModelFile<'a> {
    version: u32,
    head: Head,
    activations: Vec<Activation>,
    layers: Vec<LayerFile>,
    norm: &'a NormalizationConstants,
    meta: &'a ModelMeta,
}

pub fn model_to_json(model: &FcnnModel) -> Result<String> {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        head: model.head,
        activations: model.layers.iter().map(|l| l.activation).collect(),
        layers: model
            .layers
            .iter()
            .map(|l| LayerFile {
                rows: l.rows,
                cols: l.cols,
                w: l.w.clone(),
                b: l.b.clone(),
            })
            .collect(),
        norm: &model.norm,
        meta: &model.meta,
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

fn field<T: for<'de> Deserialize<'de>>(doc: &mut serde_json::Map<String, Value>, key: &str) -> Result<T> {
    let value = doc.remove(key).ok_or_else(|| Error::model(key, "missing"))?;
    serde_json::from_value(value).map_err(|e| Error::model(key, e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<FcnnModel> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::model("document", e.to_string()))?;
    let Value::Object(mut doc) = doc else {
        return Err(Error::model("document", "not a JSON object"));
    };
    let version: u32 = field(&mut doc, "version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::model("version", format!("unsupported version {version}")));
    }
    let head: Head = field(&mut doc, "head")?;
    let activations: Vec<Activation> = field(&mut doc, "activations")?;
    let layers: Vec<LayerFile> = field(&mut doc, "layers")?;
    let norm: NormalizationConstants = field(&mut doc, "norm")?;
    let meta: ModelMeta = match doc.remove("meta") {
        Some(v) => serde_json::from_value(v).map_err(|e| Error::model("meta", e.to_string()))?,
        None => ModelMeta::default(),
    };
    if activations.len() != layers.len() {
        return Err(Error::model(
            "activations",
            format!("{} entries for {} layers", activations.len(), layers.len()),
        ));
    }
    let model = FcnnModel {
        layers: layers
            .into_iter()
            .zip(activations)
            .map(|(l, activation)| Layer {
                rows: l.rows,
                cols: l.cols,
                w: l.w,
                b: l.b,
                activation,
            })
            .collect(),
        head,
        norm,
        meta,
    };
    model.validate().map_err(|e| Error::model("layers", e.to_string()))?;
    Ok(model)
}

pub fn save_model(model: &FcnnModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FcnnModel> {
    model_from_json(&fs::read_to_string(path)?)
}
