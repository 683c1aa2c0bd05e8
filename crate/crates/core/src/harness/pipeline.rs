//! The end-to-end run: estimate, extract, split, train, predict, score.
//!
//! Every stage is a public function so the command-line front end can run
//! them one at a time over the interchange files; [`run_pipeline`] chains them
//! and writes all artifacts plus a manifest.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, NetworkConfig};
use super::report::{
    compare, find_row, histograms_csv, improvement_table, metrics_table, pct, regression_table, rows_to_csv,
    signaling_table, statistics_table, ComparisonRow, Coordinate, SchemeOutcome,
};
use crate::error::{Error, Result};
use crate::fcnn::{
    argmax, init_model, load_model, model_to_json, train, validation_split, EpochRecord, FcnnModel, TargetData,
    TrainConfig, TrainingSet,
};
use crate::motion_field::{write_fields_csv, MvField};
use crate::neighborhood::{
    class_label, extract_samples, median_pmv, mv_statistics, normalize_sample, regression_input, split_dataset,
    write_samples_csv, MvStatistics, NeighborSample, NormalizationConstants,
};
use crate::predictors::{write_predictions_csv, Prediction, PredictionRow, Predictor, Scheme};

pub const MANIFEST_VERSION: u32 = 1;

/// Offsets added to the experiment seed for each network; the split itself
/// uses the seed unchanged.
const SEED_CLASSIFIER: u64 = 1;
pub(crate) const SEED_REGRESSOR: u64 = 3;
const SEED_REGRESSOR_CAT2: u64 = 5;

/// Motion fields of one input.
#[derive(Clone, Debug)]
pub struct SourceFields {
    pub source: String,
    pub fields: Vec<MvField>,
}

/// Runs block matching on every configured input.
pub fn estimate_inputs(config: &ExperimentConfig) -> Result<Vec<SourceFields>> {
    let me = config.me();
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(config.inputs.len());
    for input in &config.inputs {
        let source = input.source_id();
        if !seen.insert(source.clone()) {
            return Err(Error::Config(format!("duplicate source id `{source}`")));
        }
        let fields = input
            .motion_fields(&me, config.stride)
            .map_err(|e| e.in_stage("estimate", input.location()))?;
        log::info!("{source}: {} motion fields", fields.len());
        out.push(SourceFields { source, fields });
    }
    Ok(out)
}

pub fn extract_all(fields: &[SourceFields]) -> Vec<NeighborSample> {
    fields.iter().flat_map(|f| extract_samples(&f.fields, &f.source)).collect()
}

/// Train/test partition per neighbor category. Sources are split on the
/// three-neighbor samples; two-neighbor samples follow the same partition,
/// so no source contributes to both sides in either category.
#[derive(Clone, Debug, Default)]
pub struct CategorySplit {
    pub train3: Vec<NeighborSample>,
    pub test3: Vec<NeighborSample>,
    pub train2: Vec<NeighborSample>,
    pub test2: Vec<NeighborSample>,
    pub train_sources: Vec<String>,
    pub test_sources: Vec<String>,
    pub undersupplied: bool,
}

impl CategorySplit {
    pub fn train(&self) -> Vec<NeighborSample> {
        self.train3.iter().chain(&self.train2).cloned().collect()
    }

    pub fn test(&self) -> Vec<NeighborSample> {
        self.test3.iter().chain(&self.test2).cloned().collect()
    }
}

pub fn split_categories(samples: &[NeighborSample], train_quota: usize, test_quota: usize, seed: u64) -> Result<CategorySplit> {
    if samples.is_empty() {
        return Err(Error::NoSamples("no motion-compensated blocks with non-zero motion and a causal neighbor".into()));
    }
    let full: Vec<NeighborSample> = samples.iter().filter(|s| s.category() == 3).cloned().collect();
    if full.is_empty() {
        return Err(Error::NoSamples("no blocks with three motion-compensated neighbors".into()));
    }
    let split = split_dataset(&full, train_quota, test_quota, seed)?;
    let test_ids: BTreeSet<&str> = split.test_sources.iter().map(String::as_str).collect();
    let pairs = samples.iter().filter(|s| s.category() == 2);
    let test2: Vec<NeighborSample> = pairs
        .clone()
        .filter(|s| test_ids.contains(s.source_id()))
        .take(test_quota)
        .cloned()
        .collect();
    let train2: Vec<NeighborSample> = pairs
        .filter(|s| !test_ids.contains(s.source_id()))
        .take(train_quota)
        .cloned()
        .collect();
    Ok(CategorySplit {
        train3: split.train,
        test3: split.test,
        train2,
        test2,
        train_sources: split.train_sources,
        test_sources: split.test_sources,
        undersupplied: split.undersupplied,
    })
}

/// Normalization constants from the training side only.
pub fn training_norm(train: &[NeighborSample]) -> NormalizationConstants {
    NormalizationConstants::from_samples(train)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Classifier,
    Regressor,
}

pub fn training_set(kind: NetKind, samples: &[NeighborSample], norm: &NormalizationConstants, c: Coordinate) -> Result<TrainingSet> {
    let mut inputs = Vec::with_capacity(samples.len());
    match kind {
        NetKind::Classifier => {
            let mut labels = Vec::with_capacity(samples.len());
            for s in samples {
                let median = median_pmv(s);
                inputs.push(normalize_sample(s, norm, &median, true)?);
                let (lx, ly) = class_label(s, &median)?;
                labels.push(if c == Coordinate::X { lx } else { ly });
            }
            Ok(TrainingSet {
                inputs,
                targets: TargetData::Classes(labels),
            })
        }
        NetKind::Regressor => {
            let mut values = Vec::with_capacity(samples.len());
            for s in samples {
                inputs.push(regression_input(s, norm)?);
                values.push(norm.scale(s.gt().coord(c.axis()), c.axis()));
            }
            Ok(TrainingSet {
                inputs,
                targets: TargetData::Values(values),
            })
        }
    }
}

/// Validation accuracy of a trained classifier next to the share of the
/// most frequent label on the same validation samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSummary {
    pub coordinate: Coordinate,
    pub validation_samples: usize,
    pub validation_accuracy: f64,
    pub majority_frequency: f64,
    pub epochs: usize,
}

fn classifier_summary(model: &FcnnModel, data: &TrainingSet, tc: &TrainConfig, c: Coordinate) -> Result<ClassifierSummary> {
    let TargetData::Classes(labels) = &data.targets else {
        return Err(Error::Config("classifier summary needs class targets".into()));
    };
    let (train_idx, val_idx) = validation_split(data.len(), tc.validation_fraction, tc.seed);
    let idx = if val_idx.is_empty() { train_idx } else { val_idx };
    let mut counts = [0usize; 3];
    let mut hits = 0usize;
    for &i in &idx {
        counts[labels[i]] += 1;
        if argmax(&model.predict(&data.inputs[i])?) == labels[i] {
            hits += 1;
        }
    }
    let n = idx.len().max(1) as f64;
    Ok(ClassifierSummary {
        coordinate: c,
        validation_samples: idx.len(),
        validation_accuracy: hits as f64 / n,
        majority_frequency: *counts.iter().max().unwrap_or(&0) as f64 / n,
        epochs: model.meta.epochs_run,
    })
}

/// The x and y networks of one scheme.
#[derive(Clone, Debug)]
pub struct TrainedPair {
    pub kind: NetKind,
    pub x: FcnnModel,
    pub y: FcnnModel,
    pub history_x: Vec<EpochRecord>,
    pub history_y: Vec<EpochRecord>,
    pub summaries: Vec<ClassifierSummary>,
}

/// Trains the x network with `seed` and the y network with `seed + 1`.
pub fn train_pair(
    kind: NetKind,
    samples: &[NeighborSample],
    norm: &NormalizationConstants,
    net: &NetworkConfig,
    tc: &TrainConfig,
    seed: u64,
) -> Result<TrainedPair> {
    if samples.is_empty() {
        return Err(Error::NoSamples(format!("no training samples for the {kind:?} networks")));
    }
    let spec = match kind {
        NetKind::Classifier => net.classifier_spec(),
        NetKind::Regressor => net.regressor_spec(),
    };
    let fit = |c: Coordinate| -> Result<(FcnnModel, Vec<EpochRecord>, Option<ClassifierSummary>)> {
        let seed = seed.wrapping_add(c.axis() as u64);
        let data = training_set(kind, samples, norm, c)?;
        let mut model = init_model(&spec, seed)?;
        model.norm = *norm;
        let tc = TrainConfig { seed, ..*tc };
        let (model, history) = train(model, &data, &tc)?;
        let summary = match kind {
            NetKind::Classifier => Some(classifier_summary(&model, &data, &tc, c)?),
            NetKind::Regressor => None,
        };
        Ok((model, history, summary))
    };
    let (x, history_x, sx) = fit(Coordinate::X)?;
    let (y, history_y, sy) = fit(Coordinate::Y)?;
    Ok(TrainedPair {
        kind,
        x,
        y,
        history_x,
        history_y,
        summaries: sx.into_iter().chain(sy).collect(),
    })
}

/// Whatever networks the selected schemes need.
#[derive(Clone, Debug, Default)]
pub struct TrainedModels {
    pub classifier: Option<TrainedPair>,
    pub regressor: Option<TrainedPair>,
    /// Regressor for two-neighbor blocks.
    pub regressor_cat2: Option<TrainedPair>,
}

impl TrainedModels {
    fn slots(&self) -> [(&'static str, &Option<TrainedPair>); 3] {
        [
            ("classifier", &self.classifier),
            ("regressor", &self.regressor),
            ("regressor_cat2", &self.regressor_cat2),
        ]
    }

    pub fn summaries(&self) -> Vec<ClassifierSummary> {
        self.classifier.iter().flat_map(|p| p.summaries.clone()).collect()
    }

    /// Writes `<name>_x.json`, `<name>_y.json` and per-epoch histories;
    /// returns the written paths relative to `dir`.
    pub fn save(&self, dir: &Path) -> Result<Vec<String>> {
        let mut written = Vec::new();
        for (name, pair) in self.slots() {
            let Some(pair) = pair else { continue };
            for (c, model, history) in [("x", &pair.x, &pair.history_x), ("y", &pair.y, &pair.history_y)] {
                let file = format!("models/{name}_{c}.json");
                write_artifact(dir, &file, &model_to_json(model)?)?;
                written.push(file);
                if !history.is_empty() {
                    let file = format!("history/{name}_{c}.csv");
                    write_artifact(dir, &file, &history_csv(history))?;
                    written.push(file);
                }
            }
        }
        let summaries = self.summaries();
        if !summaries.is_empty() {
            let mut text = serde_json::to_string_pretty(&summaries)?;
            text.push('\n');
            write_artifact(dir, "models/classifier_summary.json", &text)?;
            written.push("models/classifier_summary.json".into());
        }
        Ok(written)
    }

    /// Loads every model pair present under `dir/models`.
    pub fn load(dir: &Path) -> Result<Self> {
        let pair = |name: &str, kind: NetKind| -> Result<Option<TrainedPair>> {
            let path = |c: &str| dir.join("models").join(format!("{name}_{c}.json"));
            if !path("x").exists() {
                return Ok(None);
            }
            let load = |c: &str| load_model(path(c)).map_err(|e| e.in_stage("load", path(c)));
            Ok(Some(TrainedPair {
                kind,
                x: load("x")?,
                y: load("y")?,
                history_x: Vec::new(),
                history_y: Vec::new(),
                summaries: Vec::new(),
            }))
        };
        let mut models = Self {
            classifier: pair("classifier", NetKind::Classifier)?,
            regressor: pair("regressor", NetKind::Regressor)?,
            regressor_cat2: pair("regressor_cat2", NetKind::Regressor)?,
        };
        let summary = dir.join("models/classifier_summary.json");
        if let (Some(c), true) = (models.classifier.as_mut(), summary.exists()) {
            c.summaries = serde_json::from_str(&fs::read_to_string(&summary)?)?;
        }
        Ok(models)
    }
}

fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,val_accuracy\n");
    for r in history {
        let acc = r.val_accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
        out.push_str(&format!("{},{:.9},{:.9},{acc}\n", r.epoch, r.train_loss, r.val_loss));
    }
    out
}

/// Trains the networks the configured schemes need.
pub fn train_models(split: &CategorySplit, config: &ExperimentConfig) -> Result<TrainedModels> {
    let norm = training_norm(&split.train());
    let mut models = TrainedModels::default();
    if config.wants(Scheme::Classifier) {
        models.classifier = Some(train_pair(
            NetKind::Classifier,
            &split.train3,
            &norm,
            &config.classifier,
            &config.classifier_training,
            config.seed.wrapping_add(SEED_CLASSIFIER),
        )?);
    }
    if config.wants(Scheme::Regressor) {
        models.regressor = Some(train_pair(
            NetKind::Regressor,
            &split.train3,
            &norm,
            &config.regressor,
            &config.regressor_training,
            config.seed.wrapping_add(SEED_REGRESSOR),
        )?);
        if !split.train2.is_empty() {
            models.regressor_cat2 = Some(train_pair(
                NetKind::Regressor,
                &split.train2,
                &norm,
                &config.regressor,
                &config.regressor_training,
                config.seed.wrapping_add(SEED_REGRESSOR_CAT2),
            )?);
        }
    }
    Ok(models)
}

/// Applies one predictor to every sample, in parallel, preserving order.
pub fn predict_all(predictor: &Predictor, samples: &[NeighborSample]) -> Result<Vec<Prediction>> {
    samples.par_iter().map(|s| predictor.predict(s)).collect()
}

fn predictor_for(scheme: Scheme, models: &TrainedModels) -> Result<Predictor> {
    let missing = |what: &str| Error::Config(format!("scheme `{scheme}` needs trained {what} models"));
    Ok(match scheme {
        Scheme::Median => Predictor::Median,
        Scheme::Best => Predictor::Best,
        Scheme::Classifier => {
            let p = models.classifier.as_ref().ok_or_else(|| missing("classifier"))?;
            Predictor::Classifier {
                x: p.x.clone(),
                y: p.y.clone(),
            }
        }
        Scheme::Regressor => {
            let p = models.regressor.as_ref().ok_or_else(|| missing("regressor"))?;
            Predictor::Regressor {
                x: p.x.clone(),
                y: p.y.clone(),
            }
        }
    })
}

/// Predictions and scores for the test side.
#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    pub outcomes: Vec<SchemeOutcome>,
    pub predictions: Vec<PredictionRow>,
    pub rows: Vec<ComparisonRow>,
    /// Median and regression on two-neighbor blocks, when a regressor for them exists.
    pub outcomes_cat2: Vec<SchemeOutcome>,
    pub predictions_cat2: Vec<PredictionRow>,
    pub rows_cat2: Vec<ComparisonRow>,
}

fn run_scheme(predictor: &Predictor, samples: &[NeighborSample]) -> Result<(SchemeOutcome, Vec<PredictionRow>)> {
    let predictions = predict_all(predictor, samples)?;
    let scheme = predictor.scheme();
    let rows = samples.iter().zip(&predictions).map(|(s, p)| PredictionRow::new(scheme, s, p)).collect();
    Ok((SchemeOutcome::from_predictions(scheme, samples, &predictions), rows))
}

pub fn evaluate(test3: &[NeighborSample], test2: &[NeighborSample], models: &TrainedModels, schemes: &[Scheme]) -> Result<Evaluation> {
    if test3.is_empty() {
        return Err(Error::NoSamples("empty three-neighbor test set".into()));
    }
    let mut eval = Evaluation::default();
    for scheme in Scheme::ALL.into_iter().filter(|s| schemes.contains(s)) {
        let (outcome, rows) = run_scheme(&predictor_for(scheme, models)?, test3)?;
        eval.outcomes.push(outcome);
        eval.predictions.extend(rows);
    }
    eval.rows = compare(&eval.outcomes)?;

    if let (Some(pair), true, false) = (&models.regressor_cat2, schemes.contains(&Scheme::Regressor), test2.is_empty()) {
        let regressor = Predictor::Regressor {
            x: pair.x.clone(),
            y: pair.y.clone(),
        };
        for predictor in [Predictor::Median, regressor] {
            let (outcome, rows) = run_scheme(&predictor, test2)?;
            eval.outcomes_cat2.push(outcome);
            eval.predictions_cat2.extend(rows);
        }
        eval.rows_cat2 = compare(&eval.outcomes_cat2)?;
    }
    Ok(eval)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub category1: usize,
    pub category2: usize,
    pub category3: usize,
    pub train3: usize,
    pub test3: usize,
    pub train2: usize,
    pub test2: usize,
}

/// Ground-truth motion statistics of the extracted samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatistics {
    pub all: MvStatistics,
    pub train: MvStatistics,
    pub test: MvStatistics,
}

#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub seed: u64,
    pub counts: SampleCounts,
    pub statistics: DatasetStatistics,
    pub train_sources: Vec<String>,
    pub test_sources: Vec<String>,
    pub undersupplied: bool,
    pub models: TrainedModels,
    pub evaluation: Evaluation,
    pub out_dir: Option<PathBuf>,
}

impl ReportBundle {
    pub fn rows(&self) -> &[ComparisonRow] {
        &self.evaluation.rows
    }

    pub fn row(&self, scheme: Scheme, c: Coordinate) -> Option<&ComparisonRow> {
        find_row(&self.evaluation.rows, scheme, c)
    }

    pub fn classifier_summaries(&self) -> Vec<ClassifierSummary> {
        self.models.summaries()
    }

    pub fn csv(&self) -> String {
        rows_to_csv(&[("cat3", &self.evaluation.rows), ("cat2", &self.evaluation.rows_cat2)])
    }

    pub fn markdown(&self) -> String {
        let c = &self.counts;
        let trained = c.train3 > 0 || !self.train_sources.is_empty();
        let mut out = String::from("# Motion-vector prediction report\n\n");
        if trained {
            out.push_str(&format!(
                "Seed {}. Samples by neighbor count: {} with one, {} with two, {} with three.\n\
                 Three-neighbor split: {} train, {} test. Two-neighbor split: {} train, {} test.\n",
                self.seed, c.category1, c.category2, c.category3, c.train3, c.test3, c.train2, c.test2
            ));
            out.push_str(&format!(
                "Train sources: {}. Test sources: {}.\n",
                self.train_sources.join(", "),
                self.test_sources.join(", ")
            ));
        } else {
            out.push_str(&format!(
                "Test set: {} three-neighbor and {} two-neighbor samples from {}.\n",
                c.test3,
                c.test2,
                self.test_sources.join(", ")
            ));
        }
        if self.undersupplied {
            out.push_str("\nA sample quota could not be met; all available samples were used.\n");
        }
        out.push_str("\n## Motion statistics\n\n");
        let mut stats = vec![("all", self.statistics.all)];
        if trained {
            stats.push(("train", self.statistics.train));
        }
        stats.push(("test", self.statistics.test));
        out.push_str(&statistics_table(&stats));
        out.push_str("\n## Three-neighbor blocks\n\n");
        for coord in Coordinate::BOTH {
            out.push_str(&metrics_table(&self.evaluation.rows, coord));
            out.push('\n');
        }
        out.push_str("### Improvement over the median\n\n");
        out.push_str(&improvement_table(&self.evaluation.rows));
        if self.evaluation.rows.iter().any(|r| r.signal_bits_flat > 0) {
            out.push_str("\n### Bits including selection signaling\n\n");
            out.push_str(&signaling_table(&self.evaluation.rows));
        }
        if self.row(Scheme::Regressor, Coordinate::X).is_some() {
            out.push_str("\n### Regression\n\n");
            out.push_str(&regression_table(&self.evaluation.rows, Scheme::Regressor));
        }
        let summaries = self.classifier_summaries();
        if !summaries.is_empty() {
            out.push_str("\n### Classifier\n\n| Coordinate | Validation accuracy | Majority class | Epochs |\n|---|---:|---:|---:|\n");
            for s in summaries {
                out.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    s.coordinate.name(),
                    pct(s.validation_accuracy),
                    pct(s.majority_frequency),
                    s.epochs
                ));
            }
        }
        if !self.evaluation.rows_cat2.is_empty() {
            out.push_str("\n## Two-neighbor blocks\n\n");
            out.push_str(&regression_table(&self.evaluation.rows_cat2, Scheme::Regressor));
        }
        out
    }
}

fn write_artifact(dir: &Path, relative: &str, contents: &str) -> Result<()> {
    let path = dir.join(relative);
    let write = || -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        Ok(())
    };
    write().map_err(|e| e.in_stage("write", &path))
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
}

/// Collects artifacts under an optional output directory.
struct Artifacts<'a> {
    dir: Option<&'a Path>,
    written: Vec<String>,
}

impl Artifacts<'_> {
    fn emit(&mut self, relative: impl Into<String>, contents: impl FnOnce() -> Result<String>) -> Result<()> {
        if let Some(dir) = self.dir {
            let relative = relative.into();
            write_artifact(dir, &relative, &contents()?)?;
            self.written.push(relative);
        }
        Ok(())
    }
}

/// Runs every stage. With `out_dir` set, all intermediate artifacts, the
/// report and a manifest recording the full config are written there.
pub fn run_pipeline(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ReportBundle> {
    config.validate()?;
    let mut out = Artifacts {
        dir: out_dir,
        written: Vec::new(),
    };

    let fields = estimate_inputs(config)?;
    for f in &fields {
        out.emit(format!("fields/{}.csv", f.source), || csv_string(|b| write_fields_csv(b, &f.fields)))?;
    }

    let samples = extract_all(&fields);
    drop(fields);
    let stage_path = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<memory>"));
    let split = match split_categories(&samples, config.train_quota, config.test_quota, config.seed) {
        Err(e @ Error::NoSamples(_)) => return Err(e),
        other => other.map_err(|e| e.in_stage("split", &stage_path))?,
    };
    let counts = SampleCounts {
        category1: samples.iter().filter(|s| s.category() == 1).count(),
        category2: samples.iter().filter(|s| s.category() == 2).count(),
        category3: samples.iter().filter(|s| s.category() == 3).count(),
        train3: split.train3.len(),
        test3: split.test3.len(),
        train2: split.train2.len(),
        test2: split.test2.len(),
    };
    let statistics = DatasetStatistics {
        all: mv_statistics(&samples),
        train: mv_statistics(&split.train3),
        test: mv_statistics(&split.test3),
    };
    out.emit("samples.csv", || csv_string(|b| write_samples_csv(b, &samples)))?;
    out.emit("train.csv", || csv_string(|b| write_samples_csv(b, &split.train())))?;
    out.emit("test.csv", || csv_string(|b| write_samples_csv(b, &split.test())))?;
    out.emit("mv_stats.json", || Ok(format!("{}\n", serde_json::to_string_pretty(&statistics)?)))?;
    drop(samples);

    let models = train_models(&split, config).map_err(|e| e.in_stage("train", &stage_path))?;
    if let Some(dir) = out_dir {
        out.written.extend(models.save(dir)?);
    }

    let evaluation =
        evaluate(&split.test3, &split.test2, &models, &config.schemes).map_err(|e| e.in_stage("evaluate", &stage_path))?;

    let bundle = ReportBundle {
        seed: config.seed,
        counts,
        statistics,
        train_sources: split.train_sources.clone(),
        test_sources: split.test_sources.clone(),
        undersupplied: split.undersupplied,
        models,
        evaluation,
        out_dir: out_dir.map(Path::to_path_buf),
    };
    if let Some(dir) = out_dir {
        write_report(&bundle, &mut out)?;
        out.written.sort();
        let manifest = serde_json::json!({
            "manifest_version": MANIFEST_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "seed": config.seed,
            "config": config,
            "artifacts": out.written,
        });
        write_artifact(dir, "manifest.json", &format!("{}\n", serde_json::to_string_pretty(&manifest)?))?;
    }
    Ok(bundle)
}

fn write_report(bundle: &ReportBundle, out: &mut Artifacts) -> Result<()> {
    let e = &bundle.evaluation;
    out.emit("predictions.csv", || csv_string(|b| write_predictions_csv(b, &e.predictions)))?;
    if !e.predictions_cat2.is_empty() {
        out.emit("predictions_cat2.csv", || csv_string(|b| write_predictions_csv(b, &e.predictions_cat2)))?;
    }
    out.emit("histograms.csv", || Ok(histograms_csv(&[("cat3", &e.outcomes), ("cat2", &e.outcomes_cat2)])))?;
    out.emit("report.csv", || Ok(bundle.csv()))?;
    out.emit("report.md", || Ok(bundle.markdown()))
}

/// Writes the prediction dumps, histograms and report tables of a bundle.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path) -> Result<Vec<String>> {
    let mut out = Artifacts {
        dir: Some(dir),
        written: Vec::new(),
    };
    write_report(bundle, &mut out)?;
    Ok(out.written)
}

/// Re-runs the experiment recorded in a manifest into `out_dir`.
pub fn rerun_manifest(manifest: &Path, out_dir: &Path) -> Result<ReportBundle> {
    let config = ExperimentConfig::load(manifest)?;
    run_pipeline(&config, Some(out_dir))
}
