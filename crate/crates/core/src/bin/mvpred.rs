//! Command-line front end. Each subcommand runs one stage over the CSV/JSON
//! interchange files; `run` chains them all.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvpred::error::{Error, Result};
use mvpred::fcnn::OptimizerConfig;
use mvpred::harness::pipeline::{
    evaluate, split_categories, train_models, write_bundle, CategorySplit, DatasetStatistics, ReportBundle,
    SampleCounts, TrainedModels,
};
use mvpred::harness::report::{compare, improvement_table, metrics_table, rows_to_csv, signaling_table, Coordinate, SchemeOutcome};
use mvpred::harness::{
    layer_sweep, multi_dataset_report, run_pipeline, synth_generate, ExperimentConfig, InputSpec, StudyConfig, SynthKind,
    SynthParams,
};
use mvpred::motion_field::{read_fields_csv, write_fields_csv};
use mvpred::neighborhood::{extract_samples, mv_statistics, read_samples_csv, write_samples_csv, NeighborSample};
use mvpred::predictors::{read_predictions_csv, Scheme};

#[derive(Parser)]
#[command(name = "mvpred", version, about = "Motion-vector prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic sequence to Y4M.
    Synth(SynthArgs),
    /// Block matching: one field CSV per input.
    Estimate(EstimateArgs),
    /// Neighbor samples and the train/test split from field CSVs.
    Extract(ExtractArgs),
    /// Train the networks the selected schemes need.
    Train(TrainArgs),
    /// Predict the test set and write comparison tables.
    Evaluate(EvaluateArgs),
    /// Comparison tables from a prediction dump, or averaged over a study.
    Report(ReportArgs),
    /// The whole pipeline from one config.
    Run(RunArgs),
    /// Regression MSE improvement for 1 to 5 hidden layers across datasets.
    Sweep(SweepArgs),
}

/// Flags that override fields of the experiment config.
#[derive(Args, Default)]
struct ConfigArgs {
    /// JSON experiment config (or a run manifest).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    search_range: Option<i32>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    sad_threshold_per_pel: Option<f64>,
    #[arg(long)]
    train_quota: Option<usize>,
    #[arg(long)]
    test_quota: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    classifier_hidden_layers: Option<usize>,
    #[arg(long)]
    classifier_width: Option<usize>,
    #[arg(long)]
    regressor_hidden_layers: Option<usize>,
    #[arg(long)]
    regressor_width: Option<usize>,
    /// Adam learning rate for both networks.
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    min_delta: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self, seed: Option<u64>) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(
            block_size => block_size,
            search_range => search_range,
            stride => stride,
            sad_threshold_per_pel => sad_threshold_per_pel,
            train_quota => train_quota,
            test_quota => test_quota,
            schemes => schemes,
            classifier_hidden_layers => classifier.hidden_layers,
            classifier_width => classifier.width,
            regressor_hidden_layers => regressor.hidden_layers,
            regressor_width => regressor.width,
        );
        for t in [&mut c.classifier_training, &mut c.regressor_training] {
            if let Some(lr) = self.learning_rate {
                t.optimizer = OptimizerConfig::adam(lr);
            }
            if let Some(v) = self.max_epochs {
                t.max_epochs = v;
            }
            if let Some(v) = self.patience {
                t.patience = v;
            }
            if let Some(v) = self.min_delta {
                t.min_delta = v;
            }
        }
        if let Some(seed) = seed {
            c.seed = seed;
        }
        Ok(c)
    }

    /// Validates everything except the input list, which stage commands take
    /// from files instead.
    fn check(config: &ExperimentConfig) -> Result<()> {
        let mut probe = config.clone();
        if probe.inputs.is_empty() {
            probe.inputs.push(InputSpec::Synth {
                kind: SynthKind::Pan,
                params: SynthParams::default(),
                seed: 0,
                source: None,
            });
        }
        probe.validate()
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON generator parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Camera motion per frame as `dx,dy`.
    #[arg(long, value_parser = parse_pan, allow_hyphen_values = true)]
    pan: Option<(f64, f64)>,
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    max_speed: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_pan(text: &str) -> std::result::Result<(f64, f64), String> {
    let parsed = text
        .split_once(',')
        .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)));
    parsed.ok_or_else(|| format!("expected `dx,dy`, got `{text}`"))
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SynthKindArg {
    Pan,
    MultiObject,
    Noise,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Y4M files, or raw 4:2:0 files when `--raw-size` is given; adds to the
    /// inputs of `--config`.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    /// Frame size of raw input as `WIDTHxHEIGHT`.
    #[arg(long)]
    raw_size: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Field CSVs; the file stem becomes the source id.
    #[arg(long = "fields", required = true, num_args = 1..)]
    fields: Vec<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Training samples as written by `extract`.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    test: PathBuf,
    /// Directory holding `models/` as written by `train`.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Prediction dump as written by `evaluate`.
    #[arg(long, conflicts_with = "study")]
    predictions: Option<PathBuf>,
    /// JSON study config: several datasets, averaged.
    #[arg(long, required_unless_present = "predictions")]
    study: Option<PathBuf>,
    /// Overrides the study's repeat count.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON study config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

fn read_samples(path: &Path) -> Result<Vec<NeighborSample>> {
    let file = File::open(path).map_err(|e| Error::from(e).in_stage("read", path))?;
    read_samples_csv(BufReader::new(file)).map_err(|e| e.in_stage("read", path))
}

fn write_csv(path: &Path, write: impl FnOnce(&mut File) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = File::create(path)?;
    write(&mut file)
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut p = match &a.config {
        Some(path) => serde_json::from_str::<SynthParams>(&fs::read_to_string(path)?).map_err(|e| Error::Config(e.to_string()))?,
        None => SynthParams::default(),
    };
    if let Some(v) = a.width {
        p.width = v;
    }
    if let Some(v) = a.height {
        p.height = v;
    }
    if let Some(v) = a.frames {
        p.frames = v;
    }
    if let Some(v) = a.pan {
        p.pan = Some(v);
    }
    if let Some(v) = a.objects {
        p.objects = v;
    }
    if let Some(v) = a.max_speed {
        p.max_speed = v;
    }
    if let Some(v) = a.noise_sigma {
        p.noise_sigma = v;
    }
    let kind = match a.kind {
        SynthKindArg::Pan => SynthKind::Pan,
        SynthKindArg::MultiObject => SynthKind::MultiObject,
        SynthKindArg::Noise => SynthKind::Noise,
    };
    synth_generate(kind, &p, a.seed, &a.out)
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("raw size `{s}` is not WIDTHxHEIGHT"));
    let (w, h) = s.split_once('x').ok_or_else(bad)?;
    Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?))
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let mut config = a.cfg.resolve(None)?;
    let size = a.raw_size.as_deref().map(parse_size).transpose()?;
    for path in a.inputs {
        config.inputs.push(match size {
            Some((width, height)) => InputSpec::RawYuv {
                path,
                width,
                height,
                source: None,
            },
            None => InputSpec::Y4m { path, source: None },
        });
    }
    config.validate()?;
    for f in mvpred::harness::pipeline::estimate_inputs(&config)? {
        let path = a.out_dir.join(format!("{}.csv", f.source));
        write_csv(&path, |w| write_fields_csv(w, &f.fields))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    let config = a.cfg.resolve(Some(a.seed))?;
    ConfigArgs::check(&config)?;
    let mut samples = Vec::new();
    for path in &a.fields {
        let file = File::open(path).map_err(|e| Error::from(e).in_stage("extract", path))?;
        let fields = read_fields_csv(BufReader::new(file), config.block_size).map_err(|e| e.in_stage("extract", path))?;
        let source = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        samples.extend(extract_samples(&fields, &source));
    }
    let split = split_categories(&samples, config.train_quota, config.test_quota, config.seed)?;
    write_csv(&a.out_dir.join("samples.csv"), |w| write_samples_csv(w, &samples))?;
    write_csv(&a.out_dir.join("train.csv"), |w| write_samples_csv(w, &split.train()))?;
    write_csv(&a.out_dir.join("test.csv"), |w| write_samples_csv(w, &split.test()))?;
    let stats = DatasetStatistics {
        all: mv_statistics(&samples),
        train: mv_statistics(&split.train3),
        test: mv_statistics(&split.test3),
    };
    fs::write(a.out_dir.join("mv_stats.json"), format!("{}\n", serde_json::to_string_pretty(&stats)?))?;
    Ok(())
}

fn by_category(samples: Vec<NeighborSample>) -> (Vec<NeighborSample>, Vec<NeighborSample>) {
    let (full, rest): (Vec<_>, Vec<_>) = samples.into_iter().partition(|s| s.category() == 3);
    (full, rest.into_iter().filter(|s| s.category() == 2).collect())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut config = a.cfg.resolve(Some(a.seed))?;
    if a.cfg.schemes.is_none() && a.cfg.config.is_none() {
        config.schemes = vec![Scheme::Classifier, Scheme::Regressor];
    }
    ConfigArgs::check(&config)?;
    let (train3, train2) = by_category(read_samples(&a.train)?);
    if train3.is_empty() {
        return Err(Error::NoSamples(format!("{} has no three-neighbor samples", a.train.display())));
    }
    let split = CategorySplit {
        train3,
        train2,
        ..Default::default()
    };
    let models = train_models(&split, &config)?;
    for path in models.save(&a.out_dir)? {
        log::info!("wrote {}", a.out_dir.join(path).display());
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let mut config = a.cfg.resolve(a.seed)?;
    let models = match &a.models {
        Some(dir) => TrainedModels::load(dir)?,
        None => TrainedModels::default(),
    };
    if a.cfg.schemes.is_none() && a.cfg.config.is_none() {
        config.schemes = vec![Scheme::Median, Scheme::Best];
        if models.classifier.is_some() {
            config.schemes.push(Scheme::Classifier);
        }
        if models.regressor.is_some() {
            config.schemes.push(Scheme::Regressor);
        }
    }
    ConfigArgs::check(&config)?;
    let (test3, test2) = by_category(read_samples(&a.test)?);
    let evaluation = evaluate(&test3, &test2, &models, &config.schemes)?;
    let bundle = ReportBundle {
        seed: config.seed,
        counts: SampleCounts {
            category2: test2.len(),
            category3: test3.len(),
            test3: test3.len(),
            test2: test2.len(),
            ..Default::default()
        },
        statistics: DatasetStatistics {
            all: mv_statistics(&test3),
            train: mv_statistics(&[]),
            test: mv_statistics(&test3),
        },
        train_sources: Vec::new(),
        test_sources: mvpred::neighborhood::source_ids(&test3),
        undersupplied: false,
        models,
        evaluation,
        out_dir: Some(a.out_dir.clone()),
    };
    write_bundle(&bundle, &a.out_dir)?;
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    if let Some(path) = &a.predictions {
        let file = File::open(path).map_err(|e| Error::from(e).in_stage("report", path))?;
        let rows = read_predictions_csv(BufReader::new(file)).map_err(|e| e.in_stage("report", path))?;
        let table = compare(&SchemeOutcome::from_rows(&rows))?;
        fs::write(a.out_dir.join("report.csv"), rows_to_csv(&[("cat3", &table)]))?;
        let mut md = String::from("# Motion-vector prediction report\n\n");
        for c in Coordinate::BOTH {
            md.push_str(&metrics_table(&table, c));
            md.push('\n');
        }
        md.push_str("### Improvement over the median\n\n");
        md.push_str(&improvement_table(&table));
        if table.iter().any(|r| r.signal_bits_flat > 0) {
            md.push_str("\n### Bits including selection signaling\n\n");
            md.push_str(&signaling_table(&table));
        }
        fs::write(a.out_dir.join("report.md"), md)?;
        return Ok(());
    }
    let study_path = a.study.as_ref().expect("clap requires one of the two");
    let mut study = StudyConfig::load(study_path)?;
    if let Some(r) = a.repeats {
        study.repeats = r;
    }
    study.validate()?;
    multi_dataset_report(&study.datasets, study.repeats, Some(&a.out_dir))?;
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let config = a.cfg.resolve(a.seed)?;
    let bundle = run_pipeline(&config, Some(&a.out_dir))?;
    print!("{}", bundle.markdown());
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let study = StudyConfig::load(&a.config)?;
    study.validate()?;
    let table = layer_sweep(&study.datasets, study.min_hidden_layers..=study.max_hidden_layers, Some(&a.out_dir))?;
    print!("{}", table.markdown());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Estimate(a) => estimate(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Report(a) => report(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
