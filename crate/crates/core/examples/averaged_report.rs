//! Mean ± standard deviation of the comparison rows over several datasets and
//! seeded re-draws. Only the signal-free schemes are run, so no training.
//!
//!     cargo run --release --example averaged_report

use mvpred::harness::{multi_dataset_report, ExperimentConfig, InputSpec, SynthKind, SynthParams};
use mvpred::predictors::Scheme;

fn dataset(first_seed: u64, max_speed: f64) -> ExperimentConfig {
    ExperimentConfig {
        inputs: (first_seed..first_seed + 4)
            .map(|seed| InputSpec::Synth {
                kind: SynthKind::MultiObject,
                params: SynthParams {
                    width: 192,
                    height: 192,
                    pan: None,
                    objects: 40,
                    object_size: (8, 12),
                    elongation: 6,
                    max_speed,
                    texture_amplitude: 10,
                    noise_sigma: 1.0,
                    ..SynthParams::default()
                },
                seed,
                source: None,
            })
            .collect(),
        block_size: 8,
        search_range: 24,
        stride: 2,
        test_quota: 1_000,
        seed: first_seed,
        schemes: vec![Scheme::Median, Scheme::Best],
        ..Default::default()
    }
}

fn main() -> mvpred::Result<()> {
    let datasets = [dataset(1, 3.0), dataset(20, 6.0)];
    let report = multi_dataset_report(&datasets, 2, None)?;
    print!("{}", report.markdown());
    Ok(())
}
