//! Median prediction against the best-neighbor oracle on synthetic footage:
//! residual MSE, entropy and Huffman bits, plus what the side channel costs.
//!
//!     cargo run --release --example median_vs_best

use mvpred::entropy_coding::{signaling_cost, summarize, SignalingMode};
use mvpred::harness::{InputSpec, SynthKind, SynthParams};
use mvpred::motion_field::MeConfig;
use mvpred::neighborhood::{extract_samples, mse};
use mvpred::predictors::{predict_best, predict_median, Prediction};

fn main() -> mvpred::Result<()> {
    let me = MeConfig {
        block_size: 8,
        search_range: 24,
        sad_threshold_per_pel: 6.0,
    };
    let mut samples = Vec::new();
    for seed in 0..4 {
        let input = InputSpec::Synth {
            kind: SynthKind::MultiObject,
            params: SynthParams {
                width: 192,
                height: 160,
                objects: 50,
                object_size: (8, 12),
                elongation: 6,
                texture_amplitude: 10,
                noise_sigma: 1.0,
                pan: None,
                max_speed: 5.0,
                ..SynthParams::default()
            },
            seed,
            source: None,
        };
        samples.extend(extract_samples(&input.motion_fields(&me, 2)?, &input.source_id()));
    }
    let full: Vec<_> = samples.into_iter().filter(|s| s.category() == 3).collect();
    println!("{} samples with all three neighbors\n", full.len());

    let median: Vec<Prediction> = full.iter().map(predict_median).collect();
    let best: Vec<Prediction> = full.iter().map(predict_best).collect::<mvpred::Result<_>>()?;

    for (name, preds) in [("median", &median), ("best", &best)] {
        let residuals: Vec<_> = preds.iter().map(|p| p.residual).collect();
        let m = mse(&residuals)?;
        let sx = summarize(&residuals.iter().map(|r| r.dx).collect::<Vec<_>>())?;
        let sy = summarize(&residuals.iter().map(|r| r.dy).collect::<Vec<_>>())?;
        let signals: Vec<_> = preds.iter().flat_map(|p| [p.signal_x, p.signal_y]).collect();
        println!(
            "{name:>6}: mse ({:.2}, {:.2})  entropy ({:.3}, {:.3})  bits {}  + signaling {} flat / {} huffman",
            m.x,
            m.y,
            sx.entropy,
            sy.entropy,
            sx.bits + sy.bits,
            signaling_cost(&signals, SignalingMode::Flat),
            signaling_cost(&signals, SignalingMode::Huffman),
        );
    }
    Ok(())
}
