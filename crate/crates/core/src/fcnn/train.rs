use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, loss_and_grad, FcnnModel, Loss, OptimizerConfig, OptimizerState, Targets};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub loss: Option<Loss>,
    pub max_epochs: usize,
    /// Epochs without an improvement larger than `min_delta` before stopping.
    pub patience: usize,
    pub min_delta: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            loss: None,
            max_epochs: 500,
            patience: 20,
            min_delta: 0.01,
            validation_fraction: 0.3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn classifier() -> Self {
        Self::default()
    }

    pub fn regressor() -> Self {
        Self {
            max_epochs: 50,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetData {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

impl TargetData {
    fn len(&self) -> usize {
        match self {
            TargetData::Classes(c) => c.len(),
            TargetData::Values(v) => v.len(),
        }
    }

    fn gather(&self, idx: &[usize]) -> TargetData {
        match self {
            TargetData::Classes(c) => TargetData::Classes(idx.iter().map(|&i| c[i]).collect()),
            TargetData::Values(v) => TargetData::Values(idx.iter().map(|&i| v[i]).collect()),
        }
    }

    fn view(&self) -> Targets<'_> {
        match self {
            TargetData::Classes(c) => Targets::Classes(c),
            TargetData::Values(v) => Targets::Values(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: TargetData,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn subset(&self, idx: &[usize]) -> TrainingSet {
        TrainingSet {
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: self.targets.gather(idx),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: Option<f64>,
}

/// Seeded hold-out: returns `(train, validation)` index lists, each sorted.
pub fn validation_split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let held = ((n as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let held = held.min(n.saturating_sub(1));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut val = idx[..held].to_vec();
    let mut train = idx[held..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

fn accuracy(model: &FcnnModel, set: &TrainingSet) -> Result<Option<f64>> {
    let TargetData::Classes(labels) = &set.targets else {
        return Ok(None);
    };
    let mut hits = 0usize;
    for (x, &label) in set.inputs.iter().zip(labels) {
        if argmax(&model.predict(x)?) == label {
            hits += 1;
        }
    }
    Ok(Some(hits as f64 / labels.len() as f64))
}

/// Full-batch training: one gradient step per epoch over the whole training
/// split. Stops after `max_epochs` or when the validation loss has failed to
/// beat its running best by more than `min_delta` for `patience` epochs, and
/// returns the weights from the epoch with the lowest validation loss.
///
/// With an empty validation split the training loss is monitored instead.
pub fn train(mut model: FcnnModel, data: &TrainingSet, config: &TrainConfig) -> Result<(FcnnModel, Vec<EpochRecord>)> {
    if data.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    if data.inputs.len() != data.targets.len() {
        return Err(Error::Shape {
            expected: data.inputs.len(),
            found: data.targets.len(),
        });
    }
    let loss = config.loss.unwrap_or(model.head.natural_loss());
    let (train_idx, val_idx) = validation_split(data.len(), config.validation_fraction, config.seed);
    let train_set = data.subset(&train_idx);
    let val_set = if val_idx.is_empty() {
        train_set.clone()
    } else {
        data.subset(&val_idx)
    };

    let mut params = model.parameters();
    let mut state = OptimizerState::new(config.optimizer, params.len());
    let mut history = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut baseline = f64::INFINITY;
    let mut stale = 0;

    for epoch in 1..=config.max_epochs {
        let (train_loss, grads) = loss_and_grad(&model, &train_set.inputs, train_set.targets.view(), loss)?;
        state.apply(&mut params, &grads)?;
        model.set_parameters(&params)?;
        let (val_loss, _) = loss_and_grad(&model, &val_set.inputs, val_set.targets.view(), loss)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy: accuracy(&model, &val_set)?,
        });
        if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
            best = Some((val_loss, params.clone()));
        }
        if val_loss < baseline - config.min_delta {
            baseline = val_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    if let Some((val_loss, params)) = &best {
        if val_loss.is_finite() {
            model.set_parameters(params)?;
        }
    }
    model.meta.seed = config.seed;
    model.meta.epochs_run = history.len();
    model.meta.final_val_loss = best.map(|(l, _)| l).filter(|l| l.is_finite());
    Ok((model, history))
}
