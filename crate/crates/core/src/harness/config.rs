use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::synth::{synth_frames, SynthKind, SynthParams};
use crate::error::{Error, Result};
use crate::fcnn::{NetworkSpec, TrainConfig};
use crate::motion_field::{MeConfig, MvField};
use crate::neighborhood::{DEFAULT_TEST_QUOTA, DEFAULT_TRAIN_QUOTA};
use crate::predictors::Scheme;
use crate::video_io::{open_raw_yuv, open_y4m, FrameStream};

/// One video source. Each input becomes one source id, and the train/test
/// split never lets a source contribute to both sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Y4m {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
    RawYuv {
        path: PathBuf,
        width: usize,
        height: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
    /// Rendered in memory from the generator; nothing touches the disk.
    Synth {
        kind: SynthKind,
        #[serde(default)]
        params: SynthParams,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
}

impl InputSpec {
    pub fn source_id(&self) -> String {
        match self {
            InputSpec::Y4m { source: Some(s), .. }
            | InputSpec::RawYuv { source: Some(s), .. }
            | InputSpec::Synth { source: Some(s), .. } => s.clone(),
            InputSpec::Y4m { path, .. } | InputSpec::RawYuv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            InputSpec::Synth { kind, seed, .. } => {
                let kind = serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_owned));
                format!("synth-{}-{seed}", kind.unwrap_or_default())
            }
        }
    }

    /// Where errors about this input point.
    pub fn location(&self) -> PathBuf {
        match self {
            InputSpec::Y4m { path, .. } | InputSpec::RawYuv { path, .. } => path.clone(),
            InputSpec::Synth { .. } => PathBuf::from(format!("<{}>", self.source_id())),
        }
    }

    pub fn frames(&self) -> Result<FrameStream> {
        match self {
            InputSpec::Y4m { path, .. } => Ok(Box::new(open_y4m(path)?)),
            InputSpec::RawYuv { path, width, height, .. } => Ok(Box::new(open_raw_yuv(path, *width, *height)?)),
            InputSpec::Synth { kind, params, seed, .. } => {
                let frames = synth_frames(*kind, params, *seed)?;
                Ok(Box::new(frames.into_iter().map(Ok)))
            }
        }
    }

    /// Block matching at the configured stride, followed by intra classification.
    pub fn motion_fields(&self, me: &MeConfig, stride: usize) -> Result<Vec<MvField>> {
        let fields = crate::motion_field::estimate_sequence(self.frames()?, stride, me.block_size, me.search_range)?;
        Ok(fields
            .into_iter()
            .map(|f| crate::motion_field::classify_blocks(f, me.sad_threshold_per_pel))
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub hidden_layers: usize,
    pub width: usize,
}

impl NetworkConfig {
    pub fn classifier_spec(&self) -> NetworkSpec {
        NetworkSpec::classifier(self.hidden_layers, self.width)
    }

    pub fn regressor_spec(&self) -> NetworkSpec {
        NetworkSpec::regressor(self.hidden_layers, self.width)
    }
}

/// Everything a pipeline run depends on. The single `seed` drives the
/// train/test split and, through fixed offsets, every network's
/// initialization and validation split; the `seed` fields inside the training
/// sections are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub inputs: Vec<InputSpec>,
    pub block_size: usize,
    pub search_range: i32,
    /// Frames advanced per motion field; above 1 emulates fast-forward footage.
    pub stride: usize,
    pub sad_threshold_per_pel: f64,
    /// Per neighbor category.
    pub train_quota: usize,
    pub test_quota: usize,
    pub seed: u64,
    pub classifier: NetworkConfig,
    pub regressor: NetworkConfig,
    pub classifier_training: TrainConfig,
    pub regressor_training: TrainConfig,
    pub schemes: Vec<Scheme>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let me = MeConfig::default();
        Self {
            inputs: Vec::new(),
            block_size: me.block_size,
            search_range: me.search_range,
            stride: 1,
            sad_threshold_per_pel: me.sad_threshold_per_pel,
            train_quota: DEFAULT_TRAIN_QUOTA,
            test_quota: DEFAULT_TEST_QUOTA,
            seed: 0,
            classifier: NetworkConfig {
                hidden_layers: 5,
                width: 8,
            },
            regressor: NetworkConfig {
                hidden_layers: 1,
                width: 8,
            },
            classifier_training: TrainConfig::classifier(),
            regressor_training: TrainConfig::regressor(),
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

pub const MAX_HIDDEN_LAYERS: usize = 5;

impl ExperimentConfig {
    pub fn me(&self) -> MeConfig {
        MeConfig {
            block_size: self.block_size,
            search_range: self.search_range,
            sad_threshold_per_pel: self.sad_threshold_per_pel,
        }
    }

    pub fn wants(&self, scheme: Scheme) -> bool {
        self.schemes.contains(&scheme)
    }

    /// Checks every field that the later stages would otherwise reject
    /// half-way through a run.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.inputs.is_empty() {
            return fail("no inputs configured".into());
        }
        if ![4, 8, 16].contains(&self.block_size) {
            return fail(format!("block_size {} is not one of 4, 8, 16", self.block_size));
        }
        if self.search_range < 0 {
            return fail(format!("negative search_range {}", self.search_range));
        }
        if self.stride == 0 {
            return fail("stride must be at least 1".into());
        }
        if !(self.sad_threshold_per_pel >= 0.0) {
            return fail("sad_threshold_per_pel must be non-negative".into());
        }
        if self.train_quota == 0 || self.test_quota == 0 {
            return fail("train and test quotas must be positive".into());
        }
        for (name, net) in [("classifier", self.classifier), ("regressor", self.regressor)] {
            if !(1..=MAX_HIDDEN_LAYERS).contains(&net.hidden_layers) {
                return fail(format!("{name}.hidden_layers {} outside 1..={MAX_HIDDEN_LAYERS}", net.hidden_layers));
            }
            if net.width == 0 {
                return fail(format!("{name}.width must be positive"));
            }
        }
        for (name, t) in [("classifier_training", &self.classifier_training), ("regressor_training", &self.regressor_training)] {
            if !(0.0..1.0).contains(&t.validation_fraction) {
                return fail(format!("{name}.validation_fraction must lie in [0, 1)"));
            }
            if t.max_epochs == 0 || t.patience == 0 {
                return fail(format!("{name}: max_epochs and patience must be positive"));
            }
            if !(t.optimizer.learning_rate > 0.0) {
                return fail(format!("{name}: learning rate must be positive"));
            }
        }
        if self.schemes.is_empty() {
            return fail("no schemes selected".into());
        }
        Ok(())
    }

    /// Reads a config file, or the `config` section of a run manifest.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(inner) = doc.get_mut("config").filter(|_| doc_is_manifest(text)) {
            doc = inner.take();
        }
        serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn doc_is_manifest(text: &str) -> bool {
    serde_json::from_str::<Value>(text)
        .map(|v| v.get("manifest_version").is_some())
        .unwrap_or(false)
}
