//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines are always printed.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use mvpred::entropy_coding::{build_huffman, decode_stream, encode_stream, entropy, histogram, SymbolHistogram};
use mvpred::fcnn::{
    init_model, loss_and_grad, Activation, FcnnModel, Head, Layer, ModelMeta, NetworkSpec, OptimizerConfig, OptimizerState,
    TrainConfig, Targets,
};
use mvpred::harness::pipeline::{estimate_inputs, extract_all};
use mvpred::harness::{
    layer_sweep, rerun_manifest, run_pipeline, Coordinate, ExperimentConfig, InputSpec, SynthKind, SynthParams,
};
use mvpred::motion_field::{full_search, MotionVector};
use mvpred::neighborhood::{median_pmv, mse, NeighborSample, NormalizationConstants};
use mvpred::predictors::{predict_best, predict_classifier, predict_median, reconstruct_best, Scheme};
use mvpred::video_io::LumaFrame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn mv(dx: i32, dy: i32) -> MotionVector {
    MotionVector::new(dx, dy)
}

/// Random three-neighbor samples; small ranges make ties common.
fn random_samples(n: usize, span: i32, seed: u64) -> Vec<NeighborSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut r = || mv(rng.random_range(-span..=span), rng.random_range(-span..=span));
        let (gt, a, b, c) = (r(), r(), r(), r());
        if let Ok(s) = NeighborSample::full(gt, a, b, c, "rand") {
            out.push(s);
        }
    }
    out
}

fn high_motion_params() -> SynthParams {
    SynthParams {
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
    }
}

fn training(lr: f64) -> TrainConfig {
    TrainConfig {
        optimizer: OptimizerConfig::adam(lr),
        max_epochs: 500,
        min_delta: 1e-4,
        ..TrainConfig::default()
    }
}

/// Fast-forward style footage: bar-shaped objects at up to 7 pels per frame,
/// sampled every 4th frame.
fn high_motion_config(sequences: u64, first_seed: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        inputs: (0..sequences)
            .map(|i| InputSpec::Synth {
                kind: SynthKind::MultiObject,
                params: high_motion_params(),
                seed: first_seed + i,
                source: None,
            })
            .collect(),
        block_size: 8,
        search_range: 32,
        stride: 4,
        seed,
        classifier_training: training(0.01),
        regressor_training: training(0.01),
        ..Default::default()
    }
}

fn dominance_on(samples: &[NeighborSample]) -> Result<usize, String> {
    let full: Vec<&NeighborSample> = samples.iter().filter(|s| s.category() == 3).collect();
    let (mut med, mut best) = (Vec::new(), Vec::new());
    for s in &full {
        let m = predict_median(s).residual;
        let b = predict_best(s).map_err(|e| e.to_string())?.residual;
        ensure!(
            b.dx.abs() <= m.dx.abs() && b.dy.abs() <= m.dy.abs(),
            "sample {s:?}: best residual {b:?} exceeds median residual {m:?}"
        );
        med.push(m);
        best.push(b);
    }
    ensure!(!full.is_empty(), "no three-neighbor samples");
    let (m, b) = (mse(&med).unwrap(), mse(&best).unwrap());
    ensure!(b.x <= m.x && b.y <= m.y, "mse best {b:?} vs median {m:?}");
    Ok(full.len())
}

fn criterion_1() -> Outcome {
    let mut checked = dominance_on(&random_samples(100_000, 12, 1))?;
    let pan = ExperimentConfig {
        inputs: vec![
            InputSpec::Synth {
                kind: SynthKind::Pan,
                params: SynthParams::default(),
                seed: 3,
                source: None,
            },
            InputSpec::Synth {
                kind: SynthKind::MultiObject,
                params: SynthParams {
                    objects: 8,
                    pan: None,
                    noise_sigma: 2.0,
                    ..SynthParams::default()
                },
                seed: 4,
                source: None,
            },
        ],
        block_size: 8,
        ..Default::default()
    };
    checked += dominance_on(&extract_all(&estimate_inputs(&pan).map_err(|e| e.to_string())?))?;
    let high = high_motion_config(3, 500, 0);
    checked += dominance_on(&extract_all(&estimate_inputs(&high).map_err(|e| e.to_string())?))?;
    Ok(format!("{checked} samples, per-sample and per-coordinate"))
}

/// A classifier that always answers `label`.
fn one_hot(label: usize) -> FcnnModel {
    let mut b = vec![-30.0; 3];
    b[label] = 30.0;
    FcnnModel {
        layers: vec![Layer {
            rows: 3,
            cols: 8,
            w: vec![0.0; 24],
            b,
            activation: Activation::Linear,
        }],
        head: Head::Softmax3,
        norm: NormalizationConstants {
            max_abs_x: 16,
            max_abs_y: 16,
        },
        meta: ModelMeta::default(),
    }
}

fn criterion_2() -> Outcome {
    let samples = random_samples(10_000, 6, 2);
    for s in &samples {
        let median = median_pmv(s);
        let (lx, ly) = mvpred::neighborhood::class_label(s, &median).map_err(|e| e.to_string())?;
        let driven = predict_classifier(s, &one_hot(lx), &one_hot(ly)).map_err(|e| e.to_string())?;
        let best = predict_best(s).map_err(|e| e.to_string())?;
        ensure!(driven.pmv == best.pmv, "{s:?}: classifier {:?} vs best {:?}", driven.pmv, best.pmv);
    }
    Ok(format!("{} of {} samples agree", samples.len(), samples.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for net in 0..100 {
        let head = if net % 2 == 0 { Head::Softmax3 } else { Head::Scalar };
        let spec = NetworkSpec {
            input: rng.random_range(1..=6),
            hidden: (0..rng.random_range(1..=3)).map(|_| rng.random_range(1..=6)).collect(),
            head,
        };
        let mut model = init_model(&spec, net).map_err(|e| e.to_string())?;
        let mut params = model.parameters();
        for p in params.iter_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        model.set_parameters(&params).unwrap();
        let batch = rng.random_range(1..=8);
        let inputs: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..spec.input).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let classes: Vec<usize> = (0..batch).map(|_| rng.random_range(0..3)).collect();
        let values: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();
        let targets = match head {
            Head::Softmax3 => Targets::Classes(&classes),
            Head::Scalar => Targets::Values(&values),
        };
        let (_, grad) = loss_and_grad(&model, &inputs, targets, head.natural_loss()).map_err(|e| e.to_string())?;
        for i in 0..params.len() {
            let mut probe = model.clone();
            let mut p = params.clone();
            p[i] = params[i] + h;
            probe.set_parameters(&p).unwrap();
            let up = loss_and_grad(&probe, &inputs, targets, head.natural_loss()).unwrap().0;
            p[i] = params[i] - h;
            probe.set_parameters(&p).unwrap();
            let down = loss_and_grad(&probe, &inputs, targets, head.natural_loss()).unwrap().0;
            let numeric = (up - down) / (2.0 * h);
            let scale = grad[i].abs().max(numeric.abs());
            let rel = if scale < 1e-8 { 0.0 } else { (grad[i] - numeric).abs() / scale };
            ensure!(rel < 1e-5, "net {net} parameter {i}: analytic {} vs numeric {numeric} (rel {rel:e})", grad[i]);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    Ok(format!("100 nets, {checked} parameters, worst relative error {worst:.2e}"))
}

/// Scripted re-implementation of the three update rules, one scalar at a time.
fn scripted(kind: &str, cfg: &OptimizerConfig, w: &mut [f64], m1: &mut [f64], m2: &mut [f64], t: &mut i32, g: &[f64]) {
    *t += 1;
    for i in 0..w.len() {
        match kind {
            "momentum" => {
                m1[i] = cfg.rho * m1[i] + g[i];
                w[i] -= cfg.learning_rate * m1[i];
            }
            "rmsprop" => {
                m2[i] = cfg.beta * m2[i] + (1.0 - cfg.beta) * g[i] * g[i];
                w[i] -= cfg.learning_rate * g[i] / (m2[i] + cfg.epsilon).sqrt();
            }
            _ => {
                m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g[i];
                m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                let m1_hat = m1[i] / (1.0 - cfg.beta1.powi(*t));
                let m2_hat = m2[i] / (1.0 - cfg.beta2.powi(*t));
                w[i] -= cfg.learning_rate * m1_hat / (m2_hat + cfg.epsilon).sqrt();
            }
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let configs = [
        ("momentum", OptimizerConfig::momentum(0.1, 0.9)),
        ("rmsprop", OptimizerConfig::rmsprop(0.01, 0.9)),
        ("adam", OptimizerConfig::adam(0.001)),
    ];
    for (kind, cfg) in configs {
        for _ in 0..200 {
            let n = 16;
            let w0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut state = OptimizerState::new(cfg, n);
            let mut w = w0.clone();
            let (mut sw, mut m1, mut m2, mut t) = (w0.clone(), vec![0.0; n], vec![0.0; n], 0);
            for step in 1..=2 {
                let g: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                state.apply(&mut w, &g).map_err(|e| e.to_string())?;
                scripted(kind, &cfg, &mut sw, &mut m1, &mut m2, &mut t, &g);
                ensure!(state.t as i32 == t, "{kind}: step counter {} after step {step}", state.t);
                for i in 0..n {
                    let err = (w[i] - sw[i]).abs();
                    ensure!(err <= 1e-10, "{kind} step {step}: {} vs scripted {}", w[i], sw[i]);
                    worst = worst.max(err);
                }
            }
        }
    }
    let mut s = OptimizerState::new(OptimizerConfig::adam(0.001), 1);
    let mut w = [0.0];
    s.apply(&mut w, &[2.0]).unwrap();
    let expected = -0.001 * 2.0 / (4.0f64 + 1e-8).sqrt();
    ensure!((w[0] - expected).abs() <= 1e-10, "adam first step {} vs {expected}", w[0]);
    Ok(format!("single and double steps, worst absolute error {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..1000 {
        let symbols = rng.random_range(2..=40);
        let hist = SymbolHistogram::from_counts((0..symbols).map(|s| (s - symbols / 2, rng.random_range(1..=10_000u64))))
            .map_err(|e| e.to_string())?;
        let table = build_huffman(&hist);
        ensure!(table.kraft_sum() == 1.0, "histogram {i}: Kraft sum {}", table.kraft_sum());
        let bits: u64 = hist.counts().iter().map(|(s, n)| n * table.get(*s).unwrap().len as u64).sum();
        let mean = bits as f64 / hist.total() as f64;
        let h = entropy(&hist);
        ensure!(h <= mean + 1e-12 && mean < h + 1.0, "histogram {i}: H {h} vs mean length {mean}");
    }
    for i in 0..100_000 {
        let len = rng.random_range(1..=48);
        let span = rng.random_range(0..=20);
        let stream: Vec<i32> = (0..len).map(|_| rng.random_range(-span..=span)).collect();
        let table = build_huffman(&histogram(&stream).unwrap());
        let bits = encode_stream(&stream, &table).map_err(|e| e.to_string())?;
        let back = decode_stream(&bits, &table).map_err(|e| e.to_string())?;
        ensure!(back == stream, "stream {i} did not round-trip");
    }
    Ok("1000 histograms, 100000 streams".into())
}

fn criterion_6() -> Outcome {
    let samples = random_samples(10_000, 8, 6);
    for s in &samples {
        let best = predict_best(s).map_err(|e| e.to_string())?;
        let decoded = reconstruct_best(s.triple().unwrap(), best.signal_x, best.signal_y).map_err(|e| e.to_string())?;
        ensure!(decoded == best.pmv, "{s:?}: decoded {decoded:?} vs {:?}", best.pmv);
    }
    Ok(format!("{} samples decoded exactly", samples.len()))
}

fn criterion_7() -> Outcome {
    let mut interior = 0usize;
    for (v, stride, range) in [((2, 0), 1, 8), ((-3, 2), 1, 8), ((2, 0), 4, 16), ((-3, 2), 4, 16), ((1, -1), 4, 8)] {
        let params = SynthParams {
            pan: Some((v.0 as f64, v.1 as f64)),
            frames: 2 * stride + 1,
            ..SynthParams::default()
        };
        let frames = mvpred::harness::synth_frames(SynthKind::Pan, &params, 7).map_err(|e| e.to_string())?;
        let fields = mvpred::motion_field::estimate_sequence(frames.into_iter().map(Ok), stride, 16, range)
            .map_err(|e| e.to_string())?;
        let expect = mv(v.0 * stride as i32, v.1 * stride as i32);
        for f in &fields {
            for b in &f.blocks {
                let (x, y) = ((b.col * 16) as i32, (b.row * 16) as i32);
                let inside = x + expect.dx >= 0
                    && y + expect.dy >= 0
                    && x + expect.dx + 16 <= params.width as i32
                    && y + expect.dy + 16 <= params.height as i32;
                if inside {
                    ensure!(b.mv == Some(expect), "v {v:?} stride {stride}: block {:?} has {:?}", (b.col, b.row), b.mv);
                    interior += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..500 {
        let pix = |rng: &mut ChaCha8Rng| (0..64).map(|_| rng.random_range(0..4u8) * 40).collect::<Vec<u8>>();
        let cur = LumaFrame::new(8, 8, 1, pix(&mut rng)).unwrap();
        let reference = LumaFrame::new(8, 8, 0, pix(&mut rng)).unwrap();
        let range = rng.random_range(1..=4);
        let field = full_search(&cur, &reference, 4, range).map_err(|e| e.to_string())?;
        for b in &field.blocks {
            let (bx, by) = (b.col as i32 * 4, b.row as i32 * 4);
            let mut best: Option<((u32, i32, i32, i32), MotionVector)> = None;
            for dy in -range..=range {
                for dx in -range..=range {
                    if bx + dx < 0 || by + dy < 0 || bx + dx + 4 > 8 || by + dy + 4 > 8 {
                        continue;
                    }
                    let mut sad = 0u32;
                    for yy in 0..4 {
                        for xx in 0..4 {
                            let a = cur.at((bx + xx) as usize, (by + yy) as usize) as i32;
                            let r = reference.at((bx + dx + xx) as usize, (by + dy + yy) as usize) as i32;
                            sad += (a - r).unsigned_abs();
                        }
                    }
                    let key = (sad, dx.abs() + dy.abs(), dy, dx);
                    if best.is_none_or(|(k, _)| key < k) {
                        best = Some((key, mv(dx, dy)));
                    }
                }
            }
            let (key, want) = best.expect("zero displacement is always a candidate");
            ensure!(b.sad == key.0, "trial {trial}: sad {} vs exhaustive {}", b.sad, key.0);
            ensure!(b.mv == Some(want), "trial {trial}: mv {:?} vs exhaustive {want:?}", b.mv);
        }
    }
    Ok(format!("{interior} interior blocks at strides 1 and 4; 500 exhaustive 8x8 re-scans"))
}

fn criterion_8() -> Outcome {
    let config = high_motion_config(16, 1000, 7);
    let bundle = run_pipeline(&config, None).map_err(|e| e.to_string())?;
    let stats = bundle.statistics.all;
    ensure!(stats.std_x >= 15.0 && stats.std_y >= 15.0, "motion std ({:.2}, {:.2}) below 15", stats.std_x, stats.std_y);
    let c = bundle.counts;
    ensure!(c.train3 >= 20_000 && c.test3 >= 2_000, "only {} train / {} test samples", c.train3, c.test3);

    let row = |s, c| bundle.row(s, c).ok_or(format!("missing {s} row"));
    let mut notes = vec![format!("std ({:.1}, {:.1}), {} train / {} test", stats.std_x, stats.std_y, c.train3, c.test3)];
    let (mut med_total, mut best_total) = (0, 0);
    for coord in Coordinate::BOTH {
        let m = row(Scheme::Median, coord)?;
        let b = row(Scheme::Best, coord)?;
        let best_bits = b.total_bits(mvpred::entropy_coding::SignalingMode::Flat);
        ensure!(best_bits < m.bits, "(a) {coord:?}: best+signaling {best_bits} >= median {}", m.bits);
        med_total += m.bits;
        best_total += best_bits;
    }
    ensure!(best_total < med_total, "(a) total best+signaling {best_total} >= median {med_total}");
    notes.push(format!("(a) bits {best_total} < {med_total}"));

    for coord in Coordinate::BOTH {
        let m = row(Scheme::Median, coord)?;
        let r = row(Scheme::Regressor, coord)?;
        let gain = 1.0 - r.mse / m.mse;
        ensure!(gain >= 0.10, "(b) {coord:?}: regression mse {:.3} vs median {:.3} ({:.1}%)", r.mse, m.mse, 100.0 * gain);
        notes.push(format!("(b) mse {} {:.1}% below median", coord.name(), 100.0 * gain));
    }

    let summaries = bundle.classifier_summaries();
    ensure!(summaries.len() == 2, "classifier summaries missing");
    for s in summaries {
        ensure!(
            s.validation_accuracy > s.majority_frequency,
            "(c) {:?}: accuracy {:.3} <= majority {:.3}",
            s.coordinate,
            s.validation_accuracy,
            s.majority_frequency
        );
        notes.push(format!(
            "(c) {} accuracy {:.1}% > majority {:.1}%",
            s.coordinate.name(),
            100.0 * s.validation_accuracy,
            100.0 * s.majority_frequency
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_9(dir: &Path) -> Outcome {
    let datasets: Vec<ExperimentConfig> = (0..5).map(|d| high_motion_config(6, 2000 + 10 * d, d)).collect();
    let table = layer_sweep(&datasets, 1..=5, Some(dir)).map_err(|e| e.to_string())?;
    ensure!(table.rows.len() == 5, "{} sweep rows", table.rows.len());
    ensure!(table.rows.iter().all(|r| r.per_dataset.len() == 5), "sweep row without five datasets");
    let md = std::fs::read_to_string(dir.join("sweep.md")).map_err(|e| e.to_string())?;
    ensure!(md.contains("| 1 Hidden Layer |") && md.contains("| 5 Hidden Layers |"), "sweep table not emitted:\n{md}");
    let one = table.row(1).expect("depth 1 is swept");
    ensure!(
        one.x.mean >= 0.10 && one.y.mean >= 0.10,
        "1 hidden layer: improvement x {:.3}, y {:.3}",
        one.x.mean,
        one.y.mean
    );
    let cells: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{}L {:.0}/{:.0}%", r.hidden_layers, 100.0 * r.x.mean, 100.0 * r.y.mean))
        .collect();
    Ok(cells.join(", "))
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn criterion_10(dir: &Path) -> Outcome {
    let mut config = high_motion_config(3, 3000, 11);
    for input in &mut config.inputs {
        if let InputSpec::Synth { params, .. } = input {
            params.width = 128;
            params.height = 128;
            params.objects = 20;
        }
    }
    config.test_quota = 400;
    config.classifier_training.max_epochs = 60;
    config.regressor_training.max_epochs = 60;
    let (a, b) = (dir.join("first"), dir.join("second"));
    run_pipeline(&config, Some(&a)).map_err(|e| e.to_string())?;
    rerun_manifest(&a.join("manifest.json"), &b).map_err(|e| e.to_string())?;
    let (fa, fb) = (files(&a), files(&b));
    ensure!(fa.keys().eq(fb.keys()), "different file sets");
    for (name, bytes) in &fa {
        ensure!(fb[name] == *bytes, "{name} differs between runs");
    }
    ensure!(fa.keys().any(|k| k.starts_with("models/")), "no model files written");
    Ok(format!("{} files byte-identical", fa.len()))
}

fn main() {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "dominance", Box::new(criterion_1)),
        (2, "oracle agreement", Box::new(criterion_2)),
        (3, "gradient check", Box::new(criterion_3)),
        (4, "optimizer oracles", Box::new(criterion_4)),
        (5, "huffman soundness", Box::new(criterion_5)),
        (6, "signal decodability", Box::new(criterion_6)),
        (7, "motion estimation", Box::new(criterion_7)),
        (8, "directional replication", Box::new(criterion_8)),
        (9, "hidden-layer sweep", Box::new(|| criterion_9(&scratch.path().join("sweep")))),
        (10, "determinism", Box::new(|| criterion_10(&scratch.path().join("rerun")))),
    ];
    let mut failed = 0;
    for (n, name, check) in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail}) [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({why}) [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
