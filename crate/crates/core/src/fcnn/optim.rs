//! Momentum, RMSprop and Adam over a flat parameter vector.
//!
//! Both adaptive methods keep ε under the square root:
//! `w -= α·g / sqrt(m² + ε)` and `w -= α·m̂¹ / sqrt(m̂² + ε)`.
//! Library implementations usually add ε after the root instead; the two
//! diverge once gradients get small.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Momentum,
    Rmsprop,
    Adam,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    /// Momentum friction ρ.
    pub rho: f64,
    /// RMSprop decay β.
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Adam,
            learning_rate: 0.001,
            rho: 0.9,
            beta: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn adam(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Default::default()
        }
    }

    pub fn momentum(learning_rate: f64, rho: f64) -> Self {
        Self {
            kind: OptimizerKind::Momentum,
            learning_rate,
            rho,
            ..Default::default()
        }
    }

    pub fn rmsprop(learning_rate: f64, beta: f64) -> Self {
        Self {
            kind: OptimizerKind::Rmsprop,
            learning_rate,
            beta,
            ..Default::default()
        }
    }
}

/// Accumulators for one parameter vector. `m1` is the velocity (momentum) or
/// first moment (Adam); `m2` the second moment (RMSprop, Adam).
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub t: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, params: usize) -> Self {
        Self {
            config,
            m1: vec![0.0; params],
            m2: vec![0.0; params],
            t: 0,
        }
    }

    /// One update with the configured rule.
    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        match self.config.kind {
            OptimizerKind::Momentum => momentum_step(self, params, grads),
            OptimizerKind::Rmsprop => rmsprop_step(self, params, grads),
            OptimizerKind::Adam => adam_step(self, params, grads),
        }
    }

    fn check(&self, kind: OptimizerKind, params: &[f64], grads: &[f64]) -> Result<()> {
        if self.config.kind != kind {
            return Err(Error::Config(format!("{:?} state used for a {kind:?} step", self.config.kind)));
        }
        for len in [params.len(), grads.len()] {
            if len != self.m1.len() {
                return Err(Error::Shape {
                    expected: self.m1.len(),
                    found: len,
                });
            }
        }
        Ok(())
    }
}

/// `v ← ρv + g; w ← w − αv`.
pub fn momentum_step(state: &mut OptimizerState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    state.check(OptimizerKind::Momentum, params, grads)?;
    let OptimizerConfig { learning_rate, rho, .. } = state.config;
    for ((w, v), &g) in params.iter_mut().zip(&mut state.m1).zip(grads) {
        *v = rho * *v + g;
        *w -= learning_rate * *v;
    }
    state.t += 1;
    Ok(())
}

/// `m² ← βm² + (1−β)g²; w ← w − αg / sqrt(m² + ε)`.
pub fn rmsprop_step(state: &mut OptimizerState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    state.check(OptimizerKind::Rmsprop, params, grads)?;
    let OptimizerConfig {
        learning_rate,
        beta,
        epsilon,
        ..
    } = state.config;
    for ((w, m2), &g) in params.iter_mut().zip(&mut state.m2).zip(grads) {
        *m2 = beta * *m2 + (1.0 - beta) * g * g;
        *w -= learning_rate * g / (*m2 + epsilon).sqrt();
    }
    state.t += 1;
    Ok(())
}

/// Bias-corrected Adam with ε inside the root.
pub fn adam_step(state: &mut OptimizerState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    state.check(OptimizerKind::Adam, params, grads)?;
    let OptimizerConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
        ..
    } = state.config;
    state.t += 1;
    let c1 = 1.0 - beta1.powi(state.t as i32);
    let c2 = 1.0 - beta2.powi(state.t as i32);
    for (((w, m1), m2), &g) in params.iter_mut().zip(&mut state.m1).zip(&mut state.m2).zip(grads) {
        *m1 = beta1 * *m1 + (1.0 - beta1) * g;
        *m2 = beta2 * *m2 + (1.0 - beta2) * g * g;
        *w -= learning_rate * (*m1 / c1) / (*m2 / c2 + epsilon).sqrt();
    }
    Ok(())
}
