//! Experiment orchestration: configs, the end-to-end pipeline, report
//! tables, multi-dataset studies and the synthetic sequence generator.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod study;
pub mod synth;

pub use config::{ExperimentConfig, InputSpec, NetworkConfig};
pub use pipeline::{rerun_manifest, run_pipeline, ClassifierSummary, ReportBundle};
pub use report::{ComparisonRow, Coordinate, MeanStd};
pub use study::{layer_sweep, multi_dataset_report, StudyConfig, SweepTable};
pub use synth::{synth_frames, synth_generate, SynthKind, SynthParams};
