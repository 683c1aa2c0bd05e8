//! Experiments over several datasets: averaged comparison tables and the
//! hidden-layer sweep of the regression network.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, NetworkConfig, MAX_HIDDEN_LAYERS};
use super::pipeline::{
    estimate_inputs, evaluate, extract_all, run_pipeline, split_categories, train_pair, training_norm,
    CategorySplit, NetKind, ReportBundle, TrainedModels,
};
use super::report::{aggregate, aggregate_csv, aggregate_markdown, fixed, mean_std_pct, AggregateTable, Coordinate, MeanStd};
use crate::error::{Error, Result};
use crate::predictors::Scheme;

pub const DEFAULT_REPEATS: usize = 5;

/// A set of dataset configs plus study-level settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub datasets: Vec<ExperimentConfig>,
    /// Seeded re-draws per dataset; run `r` uses the dataset seed plus `r`.
    pub repeats: usize,
    pub min_hidden_layers: usize,
    pub max_hidden_layers: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            repeats: DEFAULT_REPEATS,
            min_hidden_layers: 1,
            max_hidden_layers: MAX_HIDDEN_LAYERS,
        }
    }
}

impl StudyConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.len() < 2 {
            return Err(Error::Config(format!("a study needs at least two datasets, got {}", self.datasets.len())));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.min_hidden_layers == 0 || self.min_hidden_layers > self.max_hidden_layers || self.max_hidden_layers > MAX_HIDDEN_LAYERS {
            return Err(Error::Config(format!(
                "hidden layer range {}..={} outside 1..={MAX_HIDDEN_LAYERS}",
                self.min_hidden_layers, self.max_hidden_layers
            )));
        }
        self.datasets.iter().try_for_each(ExperimentConfig::validate)
    }
}

/// Comparison rows of every run and their mean ± standard deviation.
#[derive(Clone, Debug)]
pub struct MultiDatasetReport {
    pub bundles: Vec<ReportBundle>,
    pub table: AggregateTable,
}

impl MultiDatasetReport {
    pub fn markdown(&self) -> String {
        let mut out = String::from("# Averaged comparison\n\n");
        let _ = writeln!(out, "{} runs.\n", self.bundles.len());
        out.push_str(&aggregate_markdown(&self.table));
        out
    }

    pub fn csv(&self) -> String {
        aggregate_csv(&self.table)
    }
}

/// Runs every dataset `repeats` times and averages the comparison rows. With
/// `out_dir` set, each run writes its artifacts to `run-<dataset>-<repeat>/`
/// and the averaged tables go to `aggregate.csv` and `aggregate.md`.
pub fn multi_dataset_report(configs: &[ExperimentConfig], repeats: usize, out_dir: Option<&Path>) -> Result<MultiDatasetReport> {
    if configs.len() < 2 {
        return Err(Error::Config(format!("need at least two dataset configs, got {}", configs.len())));
    }
    let mut bundles = Vec::new();
    let mut labels = Vec::new();
    for (i, base) in configs.iter().enumerate() {
        for r in 0..repeats.max(1) {
            let cfg = ExperimentConfig {
                seed: base.seed.wrapping_add(r as u64),
                ..base.clone()
            };
            let dir = out_dir.map(|d| d.join(format!("run-{}-{}", i + 1, r + 1)));
            bundles.push(run_pipeline(&cfg, dir.as_deref())?);
            labels.push(if repeats > 1 {
                format!("Dataset{}.{}", i + 1, r + 1)
            } else {
                format!("Dataset{}", i + 1)
            });
        }
    }
    let table = aggregate(labels, bundles.iter().map(|b| b.rows().to_vec()).collect());
    let report = MultiDatasetReport { bundles, table };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("aggregate.csv"), report.csv())?;
        std::fs::write(dir.join("aggregate.md"), report.markdown())?;
    }
    Ok(report)
}

/// MSE improvement of the regressor over the median at one depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub hidden_layers: usize,
    pub per_dataset: Vec<(f64, f64)>,
    pub x: MeanStd,
    pub y: MeanStd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, hidden_layers: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.hidden_layers == hidden_layers)
    }

    pub fn markdown(&self) -> String {
        let mut out = String::from(
            "# MSE improvement over the median by hidden-layer count\n\n| Hidden layers | 1 - MSE x / median | 1 - MSE y / median |\n|---|---:|---:|\n",
        );
        for r in &self.rows {
            let label = if r.hidden_layers == 1 { "Hidden Layer" } else { "Hidden Layers" };
            let _ = writeln!(out, "| {} {label} | {} | {} |", r.hidden_layers, mean_std_pct(&r.x), mean_std_pct(&r.y));
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("hidden_layers,dataset,improvement_mse_x,improvement_mse_y\n");
        for r in &self.rows {
            for (i, (x, y)) in r.per_dataset.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", r.hidden_layers, i + 1, fixed(*x), fixed(*y));
            }
            let _ = writeln!(out, "{},mean,{},{}", r.hidden_layers, fixed(r.x.mean), fixed(r.y.mean));
            let _ = writeln!(out, "{},std,{},{}", r.hidden_layers, fixed(r.x.std), fixed(r.y.std));
        }
        out
    }
}

/// Trains regressors of every depth in `layers` on each dataset and reports
/// the MSE improvement over the median on the held-out sources. Datasets are
/// estimated and split once; only the networks change between depths.
pub fn layer_sweep(configs: &[ExperimentConfig], layers: std::ops::RangeInclusive<usize>, out_dir: Option<&Path>) -> Result<SweepTable> {
    if configs.is_empty() {
        return Err(Error::Config("layer sweep needs at least one dataset".into()));
    }
    if *layers.start() == 0 || *layers.end() > MAX_HIDDEN_LAYERS {
        return Err(Error::Config(format!("hidden layers must lie in 1..={MAX_HIDDEN_LAYERS}")));
    }
    let prepared: Vec<(CategorySplit, &ExperimentConfig)> = configs
        .iter()
        .map(|cfg| {
            cfg.validate()?;
            let samples = extract_all(&estimate_inputs(cfg)?);
            Ok((split_categories(&samples, cfg.train_quota, cfg.test_quota, cfg.seed)?, cfg))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for hidden in layers {
        let mut per_dataset = Vec::new();
        for (split, cfg) in &prepared {
            let norm = training_norm(&split.train());
            let net = NetworkConfig {
                hidden_layers: hidden,
                ..cfg.regressor
            };
            let pair = train_pair(NetKind::Regressor, &split.train3, &norm, &net, &cfg.regressor_training, cfg.seed.wrapping_add(super::pipeline::SEED_REGRESSOR))?;
            let models = TrainedModels {
                regressor: Some(pair),
                ..Default::default()
            };
            let eval = evaluate(&split.test3, &[], &models, &[Scheme::Median, Scheme::Regressor])?;
            let imp = |c: Coordinate| {
                super::report::find_row(&eval.rows, Scheme::Regressor, c)
                    .and_then(|r| r.improvement)
                    .map(|i| i.mse)
                    .unwrap_or(f64::NAN)
            };
            per_dataset.push((imp(Coordinate::X), imp(Coordinate::Y)));
        }
        let xs: Vec<f64> = per_dataset.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = per_dataset.iter().map(|p| p.1).collect();
        log::info!("{hidden} hidden layers: x {:.3}, y {:.3}", MeanStd::of(&xs).mean, MeanStd::of(&ys).mean);
        rows.push(SweepRow {
            hidden_layers: hidden,
            x: MeanStd::of(&xs),
            y: MeanStd::of(&ys),
            per_dataset,
        });
    }
    let table = SweepTable { rows };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), table.csv())?;
        std::fs::write(dir.join("sweep.md"), table.markdown())?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study_needs_two_datasets() {
        assert!(matches!(multi_dataset_report(&[ExperimentConfig::default()], 5, None), Err(Error::Config(_))));
        let study = StudyConfig {
            datasets: vec![ExperimentConfig::default()],
            ..Default::default()
        };
        assert!(study.validate().is_err());
    }

    #[test]
    fn sweep_rejects_depths_outside_range() {
        assert!(layer_sweep(&[ExperimentConfig::default()], 0..=2, None).is_err());
        assert!(layer_sweep(&[ExperimentConfig::default()], 1..=6, None).is_err());
    }

    #[test]
    fn study_defaults() {
        let s: StudyConfig = serde_json::from_str(r#"{"datasets":[]}"#).unwrap();
        assert_eq!(s.repeats, 5);
        assert_eq!((s.min_hidden_layers, s.max_hidden_layers), (1, 5));
    }
}
