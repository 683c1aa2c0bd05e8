//! Regression MSE improvement over the median for 1 to 5 hidden layers,
//! averaged over several synthetic datasets.
//!
//!     cargo run --release --example layer_sweep

use mvpred::fcnn::{OptimizerConfig, TrainConfig};
use mvpred::harness::{layer_sweep, ExperimentConfig, InputSpec, SynthKind, SynthParams};

fn dataset(first_seed: u64) -> ExperimentConfig {
    let training = TrainConfig {
        optimizer: OptimizerConfig::adam(0.01),
        max_epochs: 300,
        min_delta: 1e-4,
        ..TrainConfig::default()
    };
    ExperimentConfig {
        inputs: (first_seed..first_seed + 5)
            .map(|seed| InputSpec::Synth {
                kind: SynthKind::MultiObject,
                params: SynthParams {
                    width: 256,
                    height: 256,
                    frames: 9,
                    pan: None,
                    objects: 80,
                    object_size: (8, 12),
                    elongation: 8,
                    max_speed: 7.0,
                    texture_amplitude: 10,
                    noise_sigma: 1.0,
                },
                seed,
                source: None,
            })
            .collect(),
        block_size: 8,
        search_range: 32,
        stride: 4,
        seed: first_seed,
        test_quota: 500,
        regressor_training: training,
        ..Default::default()
    }
}

fn main() -> mvpred::Result<()> {
    let datasets: Vec<_> = (0..3).map(|d| dataset(100 + 10 * d)).collect();
    let table = layer_sweep(&datasets, 1..=5, None)?;
    print!("{}", table.markdown());
    Ok(())
}
