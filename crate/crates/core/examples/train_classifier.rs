//! Train the pair of neighbor classifiers (one per coordinate) on synthetic
//! footage and compare their pick with the best-neighbor oracle on held-out
//! sources.
//!
//!     cargo run --release --example train_classifier

use mvpred::fcnn::{train, init_model, NetworkSpec, OptimizerConfig, TrainConfig};
use mvpred::harness::pipeline::{estimate_inputs, extract_all, split_categories, training_norm, training_set, NetKind};
use mvpred::harness::{Coordinate, ExperimentConfig, InputSpec, SynthKind, SynthParams};
use mvpred::neighborhood::mse;
use mvpred::predictors::{predict_best, predict_classifier, predict_median};

fn main() -> mvpred::Result<()> {
    let config = ExperimentConfig {
        inputs: (0..8)
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
        ..Default::default()
    };
    let samples = extract_all(&estimate_inputs(&config)?);
    let split = split_categories(&samples, 50_000, 500, 1)?;
    let norm = training_norm(&split.train());
    println!("{} train / {} test samples, scale ({}, {})", split.train3.len(), split.test3.len(), norm.max_abs_x, norm.max_abs_y);

    let tc = TrainConfig {
        optimizer: OptimizerConfig::adam(0.01),
        max_epochs: 300,
        min_delta: 1e-4,
        ..TrainConfig::default()
    };
    let mut models = Vec::new();
    for (i, c) in Coordinate::BOTH.into_iter().enumerate() {
        let data = training_set(NetKind::Classifier, &split.train3, &norm, c)?;
        let mut model = init_model(&NetworkSpec::classifier(5, 8), i as u64)?;
        model.norm = norm;
        let (model, history) = train(model, &data, &TrainConfig { seed: i as u64, ..tc.clone() })?;
        let last = history.last().expect("at least one epoch");
        println!("{}: {} epochs, validation accuracy {:.3}", c.name(), history.len(), last.val_accuracy.unwrap_or(f64::NAN));
        models.push(model);
    }

    let (mut med, mut cls, mut best) = (Vec::new(), Vec::new(), Vec::new());
    for s in &split.test3 {
        med.push(predict_median(s).residual);
        cls.push(predict_classifier(s, &models[0], &models[1])?.residual);
        best.push(predict_best(s)?.residual);
    }
    for (name, r) in [("median", med), ("classifier", cls), ("best (oracle)", best)] {
        let m = mse(&r)?;
        println!("{name:>14}: mse ({:.2}, {:.2})", m.x, m.y);
    }
    Ok(())
}
