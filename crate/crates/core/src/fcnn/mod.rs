//! Small fully connected tanh networks, written out by hand.
//!
//! Parameters are exposed as one flat vector (per layer: weights row-major,
//! then biases) so the optimizers can stay agnostic of layer structure.

mod io;
mod optim;
mod train;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighborhood::NormalizationConstants;

pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use optim::{adam_step, momentum_step, rmsprop_step, OptimizerConfig, OptimizerKind, OptimizerState};
pub use train::{train, validation_split, EpochRecord, TargetData, TrainConfig, TrainingSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Head {
    /// Three-way softmax over the final layer's logits.
    #[serde(rename = "softmax3")]
    Softmax3,
    /// The final layer's single linear output.
    #[serde(rename = "scalar")]
    Scalar,
}

impl Head {
    pub fn outputs(self) -> usize {
        match self {
            Head::Softmax3 => 3,
            Head::Scalar => 1,
        }
    }

    pub fn natural_loss(self) -> Loss {
        match self {
            Head::Softmax3 => Loss::CrossEntropy,
            Head::Scalar => Loss::Euclidean,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    CrossEntropy,
    Euclidean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    /// `rows x cols`, row-major.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.w.chunks_exact(self.cols).zip(&self.b).map(|(row, b)| {
            row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b
        }));
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub final_val_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcnnModel {
    pub layers: Vec<Layer>,
    pub head: Head,
    pub norm: NormalizationConstants,
    pub meta: ModelMeta,
}

/// Layer widths of a network: `input -> hidden... -> head`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub head: Head,
}

impl NetworkSpec {
    /// 8 inputs (six scaled components plus two median arguments), softmax-3.
    pub fn classifier(hidden_layers: usize, width: usize) -> Self {
        Self {
            input: 8,
            hidden: vec![width; hidden_layers],
            head: Head::Softmax3,
        }
    }

    /// 6 inputs, one scalar output.
    pub fn regressor(hidden_layers: usize, width: usize) -> Self {
        Self {
            input: 6,
            hidden: vec![width; hidden_layers],
            head: Head::Scalar,
        }
    }

    fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.head.outputs()))
            .collect()
    }
}

/// Glorot-uniform weights from a seeded ChaCha stream, zero biases.
pub fn init_model(spec: &NetworkSpec, seed: u64) -> Result<FcnnModel> {
    let widths = spec.widths();
    if widths.contains(&0) {
        return Err(Error::Config(format!("zero-width layer in {widths:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = widths.len() - 2;
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Layer {
                rows: fan_out,
                cols: fan_in,
                w: (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect(),
                b: vec![0.0; fan_out],
                activation: if k == last { Activation::Linear } else { Activation::Tanh },
            }
        })
        .collect();
    let model = FcnnModel {
        layers,
        head: spec.head,
        norm: NormalizationConstants::default(),
        meta: ModelMeta {
            seed,
            ..Default::default()
        },
    };
    model.validate()?;
    Ok(model)
}

/// Activations seen during one forward pass: `activations[0]` is the input,
/// `activations[k + 1]` the output of layer `k` (before the head).
#[derive(Clone, Debug, Default)]
pub struct ForwardCache {
    pub activations: Vec<Vec<f64>>,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// Lowest index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl FcnnModel {
    pub fn input_len(&self) -> usize {
        self.layers[0].cols
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let Some(first) = self.layers.first() else {
            return Err(Error::Config("network has no layers".into()));
        };
        let mut width = first.cols;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.cols != width {
                return Err(Error::Config(format!("layer {k} takes {} inputs, previous emits {width}", layer.cols)));
            }
            if layer.w.len() != layer.rows * layer.cols || layer.b.len() != layer.rows {
                return Err(Error::Config(format!("layer {k} parameter lengths do not match {}x{}", layer.rows, layer.cols)));
            }
            width = layer.rows;
        }
        if width != self.head.outputs() {
            return Err(Error::Config(format!("{:?} head needs {} outputs, network has {width}", self.head, self.head.outputs())));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.input_len() {
            return Err(Error::Shape {
                expected: self.input_len(),
                found: input.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for layer in &self.layers {
            let mut z = Vec::with_capacity(layer.rows);
            layer.affine(activations.last().unwrap(), &mut z);
            z.iter_mut().for_each(|v| *v = layer.activation.apply(*v));
            activations.push(z);
        }
        let last = activations.last().unwrap();
        let output = match self.head {
            Head::Softmax3 => softmax(last),
            Head::Scalar => last.clone(),
        };
        Ok((output, ForwardCache { activations }))
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input).map(|(out, _)| out)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend_from_slice(&l.w);
            p.extend_from_slice(&l.b);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Shape {
                expected: self.param_count(),
                found: params.len(),
            });
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.w.len());
            let (b, tail) = tail.split_at(l.b.len());
            l.w.copy_from_slice(w);
            l.b.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// Adds the gradient of `scale * loss(sample)` into `grad`; returns the
    /// unscaled per-sample loss.
    fn accumulate_sample(&self, input: &[f64], target: Target, scale: f64, grad: &mut [f64]) -> Result<f64> {
        let (output, cache) = self.forward(input)?;
        let (loss, mut delta) = match (self.head, target) {
            (Head::Softmax3, Target::Class(c)) => {
                if c >= 3 {
                    return Err(Error::Config(format!("class label {c} outside 0..3")));
                }
                let loss = -output[c].max(f64::MIN_POSITIVE).ln();
                let mut d = output;
                d[c] -= 1.0;
                (loss, d)
            }
            (Head::Scalar, Target::Value(y)) => {
                let e = output[0] - y;
                (e * e, vec![2.0 * e])
            }
            _ => return Err(Error::Config("target kind does not match the network head".into())),
        };
        delta.iter_mut().for_each(|d| *d *= scale);

        // Offsets of each layer's block in the flat parameter vector.
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut at = 0;
        for l in &self.layers {
            offsets.push(at);
            at += l.w.len() + l.b.len();
        }
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let a_in = &cache.activations[k];
            let a_out = &cache.activations[k + 1];
            for (d, &a) in delta.iter_mut().zip(a_out) {
                *d *= layer.activation.derivative_from_output(a);
            }
            let (gw, gb) = grad[offsets[k]..offsets[k] + layer.w.len() + layer.b.len()].split_at_mut(layer.w.len());
            for (r, &d) in delta.iter().enumerate() {
                for (g, &a) in gw[r * layer.cols..(r + 1) * layer.cols].iter_mut().zip(a_in) {
                    *g += d * a;
                }
                gb[r] += d;
            }
            if k > 0 {
                let mut back = vec![0.0; layer.cols];
                for (r, &d) in delta.iter().enumerate() {
                    for (bk, &w) in back.iter_mut().zip(&layer.w[r * layer.cols..(r + 1) * layer.cols]) {
                        *bk += w * d;
                    }
                }
                delta = back;
            }
        }
        Ok(loss)
    }
}

#[derive(Clone, Copy, Debug)]
enum Target {
    Class(usize),
    Value(f64),
}

/// Batch targets: class indices for softmax heads, scalars for scalar heads.
#[derive(Clone, Copy, Debug)]
pub enum Targets<'a> {
    Classes(&'a [usize]),
    Values(&'a [f64]),
}

impl Targets<'_> {
    fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Values(v) => v.len(),
        }
    }

    fn get(&self, i: usize) -> Target {
        match self {
            Targets::Classes(c) => Target::Class(c[i]),
            Targets::Values(v) => Target::Value(v[i]),
        }
    }
}

/// Samples per parallel work unit. Fixed, so the reduction order (and with it
/// every bit of the result) does not depend on the thread count.
const GRAD_CHUNK: usize = 512;

/// Batch-mean loss and its exact gradient in [`FcnnModel::parameters`] order.
pub fn loss_and_grad(model: &FcnnModel, inputs: &[Vec<f64>], targets: Targets<'_>, loss: Loss) -> Result<(f64, Vec<f64>)> {
    if loss != model.head.natural_loss() {
        return Err(Error::Config(format!("{loss:?} loss cannot train a {:?} head", model.head)));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Shape {
            expected: inputs.len(),
            found: targets.len(),
        });
    }
    if inputs.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    let n = inputs.len();
    let scale = 1.0 / n as f64;
    let params = model.param_count();
    let partials: Vec<Result<(f64, Vec<f64>)>> = (0..n.div_ceil(GRAD_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut grad = vec![0.0; params];
            let mut total = 0.0;
            for i in chunk * GRAD_CHUNK..((chunk + 1) * GRAD_CHUNK).min(n) {
                total += model.accumulate_sample(&inputs[i], targets.get(i), scale, &mut grad)?;
            }
            Ok((total, grad))
        })
        .collect();
    let mut total = 0.0;
    let mut grad = vec![0.0; params];
    for part in partials {
        let (l, g) = part?;
        total += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    Ok((total * scale, grad))
}

/// Batch-mean loss only.
pub fn batch_loss(model: &FcnnModel, inputs: &[Vec<f64>], targets: Targets<'_>) -> Result<f64> {
    loss_and_grad(model, inputs, targets, model.head.natural_loss()).map(|(l, _)| l)
}
