//! Configuration-driven experiments: simulate labelled realizations,
//! summarize them, train classifiers and report misclassification rates
//! with exact intervals.

pub mod config;
pub mod error;
pub mod process;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, Process};
pub use error::{ExperimentError, Result};
pub use process::{CalibrationRecord, Calibrator, Simulator};
pub use report::{emit_scatter, render_table, ExperimentReport};
pub use run::Experiment;
