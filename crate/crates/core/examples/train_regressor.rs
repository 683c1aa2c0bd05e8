//! Train the regression pair, save it as model JSON, load it back and score
//! it against the median on held-out sources.
//!
//!     cargo run --release --example train_regressor

use mvpred::fcnn::{load_model, save_model, OptimizerConfig, TrainConfig};
use mvpred::harness::pipeline::{estimate_inputs, extract_all, split_categories, train_pair, training_norm, NetKind};
use mvpred::harness::{ExperimentConfig, InputSpec, NetworkConfig, SynthKind, SynthParams};
use mvpred::neighborhood::mse;
use mvpred::predictors::{predict_median, predict_regressor};

fn main() -> mvpred::Result<()> {
    let config = ExperimentConfig {
        inputs: (10..18)
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
    let split = split_categories(&extract_all(&estimate_inputs(&config)?), 50_000, 500, 3)?;
    let norm = training_norm(&split.train());
    let tc = TrainConfig {
        optimizer: OptimizerConfig::adam(0.01),
        max_epochs: 400,
        min_delta: 1e-4,
        ..TrainConfig::default()
    };
    let net = NetworkConfig {
        hidden_layers: 1,
        width: 8,
    };
    let pair = train_pair(NetKind::Regressor, &split.train3, &norm, &net, &tc, 3)?;
    println!("trained for {} / {} epochs", pair.history_x.len(), pair.history_y.len());

    let dir = tempfile::tempdir()?;
    save_model(&pair.x, dir.path().join("regressor_x.json"))?;
    save_model(&pair.y, dir.path().join("regressor_y.json"))?;
    let x = load_model(dir.path().join("regressor_x.json"))?;
    let y = load_model(dir.path().join("regressor_y.json"))?;
    assert_eq!(x, pair.x);

    let (mut med, mut reg, mut raw) = (Vec::new(), Vec::new(), Vec::new());
    for s in &split.test3 {
        med.push(predict_median(s).residual);
        let p = predict_regressor(s, &x, &y)?;
        reg.push(p.residual);
        let (rx, ry) = p.raw.expect("regressor keeps its raw output");
        raw.push((rx - s.gt().dx as f64, ry - s.gt().dy as f64));
    }
    let (m, r, u) = (mse(&med)?, mse(&reg)?, mvpred::neighborhood::mse_f64(raw)?);
    println!("median    mse ({:.2}, {:.2})", m.x, m.y);
    println!("regressor mse ({:.2}, {:.2}), before rounding ({:.2}, {:.2})", r.x, r.y, u.x, u.y);
    println!("improvement {:.1}% / {:.1}%", 100.0 * (1.0 - r.x / m.x), 100.0 * (1.0 - r.y / m.y));
    Ok(())
}
