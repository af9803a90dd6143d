//! The pairwise, same-model split and pooled experiments.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use discern_core::classify::{misclassification, ClassifierModel};
use discern_core::seed::derive_seed;
use discern_core::summarize::{pool_summaries, summarize_realization, FeatureVector, RealizationSummary, POOL_SIZE};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Process};
use crate::error::{Context, ExperimentError, Result};
use crate::process::{simulator_for, CalibrationRecord, Calibrator, Simulator};
use crate::report::{class_results, write_features, ExperimentReport, FeatureRow, CI_LEVEL};

/// Summaries of `n_train + n_test` realizations of one process, in index
/// order.
#[derive(Debug, Clone)]
pub struct Sample {
    pub process: Process,
    pub seeds: Vec<u64>,
    pub summaries: Vec<RealizationSummary>,
}

impl Sample {
    fn rows(&self, label: &str) -> Vec<FeatureRow> {
        self.seeds
            .iter()
            .zip(&self.summaries)
            .map(|(&seed, s)| FeatureRow {
                label: label.to_string(),
                seed,
                features: s.features,
            })
            .collect()
    }

    /// Pooled feature rows over consecutive groups; each row carries the
    /// seed of the group's first member.
    fn pooled_rows(&self, label: &str) -> Result<Vec<FeatureRow>> {
        self.summaries
            .chunks_exact(POOL_SIZE)
            .zip(self.seeds.chunks_exact(POOL_SIZE))
            .map(|(group, seeds)| {
                let features = pool_summaries(group).context(|| {
                    format!("pooling {} realizations from seed {}", self.process, seeds[0])
                })?;
                Ok(FeatureRow {
                    label: label.to_string(),
                    seed: seeds[0],
                    features,
                })
            })
            .collect()
    }
}

/// Simulate and summarize `n` realizations with seeds drawn from the
/// stream of `process` under the master seed.
pub fn generate_sample(
    sim: &Simulator,
    process: Process,
    config: &ExperimentConfig,
    n: usize,
) -> Result<Sample> {
    let (outer, inner) = (config.outer(), config.inner());
    let seeds: Vec<u64> = (0..n as u64).map(|i| derive_seed(config.seed, process.tag(), i)).collect();
    let summaries = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let r = sim
                .realize(&outer, &inner, seed)
                .context(|| format!("simulating {process} realization {i} (seed {seed})"))?;
            summarize_realization(&r).context(|| format!("features of {process} realization {i} (seed {seed})"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample {
        process,
        seeds,
        summaries,
    })
}

fn select(f: &FeatureVector, columns: &[usize]) -> Vec<f64> {
    let a = f.to_array();
    columns.iter().map(|&k| a[k]).collect()
}

/// Train on the first `n_train` rows of each class and evaluate on the next
/// `n_test`.
fn train_and_test(
    config: &ExperimentConfig,
    class0: &[FeatureRow],
    class1: &[FeatureRow],
    n_train: usize,
    n_test: usize,
) -> Result<[crate::report::ClassResult; 2]> {
    let cols = config.feature_columns();
    let names: Vec<&str> = config.features.iter().map(String::as_str).collect();
    let x = |rows: &[FeatureRow]| rows.iter().map(|r| select(&r.features, &cols)).collect::<Vec<_>>();
    let (x0, x1) = (x(class0), x(class1));
    if x0.len() < n_train + n_test || x1.len() < n_train + n_test {
        return Err(ExperimentError::Config(format!(
            "need {} rows per class, have {} and {}",
            n_train + n_test,
            x0.len(),
            x1.len()
        )));
    }
    let model = ClassifierModel::train(config.classifier_kind(), &x0[..n_train], &x1[..n_train], &names)
        .context(|| format!("training {}", config.classifier))?;
    let counts = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        let pred: Vec<usize> = model.predict_all(a).into_iter().chain(model.predict_all(b)).collect();
        let truth: Vec<usize> = std::iter::repeat_n(0, a.len()).chain(std::iter::repeat_n(1, b.len())).collect();
        misclassification(&pred, &truth).context(|| "counting misclassifications".into())
    };
    let train = counts(&x0[..n_train], &x1[..n_train])?;
    let test = counts(&x0[n_train..n_train + n_test], &x1[n_train..n_train + n_test])?;
    class_results([&class0[0].label, &class1[0].label], &train, &test)
}

/// Runs experiments for one configuration, reusing calibrations and
/// samples across runs.
pub struct Experiment {
    config: ExperimentConfig,
    out_dir: PathBuf,
    calibrator: Calibrator,
    records: HashMap<Process, CalibrationRecord>,
    samples: HashMap<Process, Arc<Sample>>,
}

impl Experiment {
    /// Feature tables go to `out_dir`, calibration records to
    /// `out_dir/calibration`.
    pub fn new(config: ExperimentConfig, out_dir: &Path) -> Result<Self> {
        let config = config.validated()?;
        Ok(Self {
            config,
            out_dir: out_dir.to_path_buf(),
            calibrator: Calibrator::new(Some(out_dir.join("calibration"))),
            records: HashMap::new(),
            samples: HashMap::new(),
        })
    }

    /// Keep calibration records in `dir` instead, so several experiments
    /// can share them.
    pub fn with_calibration_dir(mut self, dir: &Path) -> Self {
        self.calibrator = Calibrator::new(Some(dir.to_path_buf()));
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    fn partner(&self) -> Process {
        self.config.partner
    }

    /// Calibration of `process`; Strauss is matched to the configured
    /// partner.
    pub fn calibration(&mut self, process: Process) -> Result<CalibrationRecord> {
        if let Some(r) = self.records.get(&process) {
            return Ok(r.clone());
        }
        let rec = if process == Process::Strauss {
            let partner = self.calibration(self.partner())?;
            self.calibrator.strauss_for(&self.config, &partner)?
        } else {
            self.calibrator.partner(&self.config, process)?
        };
        self.records.insert(process, rec.clone());
        Ok(rec)
    }

    pub fn simulator(&mut self, process: Process) -> Result<Simulator> {
        let rec = self.calibration(process)?;
        Ok(simulator_for(&self.config, &rec))
    }

    /// The `n_train + n_test` realizations of `process`, summarized.
    pub fn sample(&mut self, process: Process) -> Result<Arc<Sample>> {
        if let Some(s) = self.samples.get(&process) {
            return Ok(s.clone());
        }
        let sim = self.simulator(process)?;
        let n = self.config.n_train + self.config.n_test;
        let s = Arc::new(generate_sample(&sim, process, &self.config, n)?);
        self.samples.insert(process, s.clone());
        Ok(s)
    }

    fn write_table(&self, name: &str, rows: &[FeatureRow]) -> Result<String> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| ExperimentError::io(&self.out_dir, e))?;
        write_features(&self.out_dir.join(name), rows)?;
        Ok(name.to_string())
    }

    fn report(
        &self,
        experiment: &str,
        config: &ExperimentConfig,
        classes: [crate::report::ClassResult; 2],
        calibration: Vec<CalibrationRecord>,
        feature_files: Vec<String>,
    ) -> ExperimentReport {
        ExperimentReport {
            experiment: experiment.into(),
            case: self.partner().case_name().into(),
            classifier: config.classifier_kind().name().into(),
            features: config.features.clone(),
            ci_level: CI_LEVEL,
            classes,
            calibration,
            feature_files,
            config: config.clone(),
        }
    }

    fn pair_with(&mut self, config: &ExperimentConfig) -> Result<ExperimentReport> {
        let partner = self.partner();
        let strauss = self.sample(Process::Strauss)?;
        let other = self.sample(partner)?;
        let rows0 = strauss.rows(Process::Strauss.tag());
        let rows1 = other.rows(partner.tag());
        let classes = train_and_test(config, &rows0, &rows1, config.n_train, config.n_test)?;
        let all: Vec<FeatureRow> = rows0.into_iter().chain(rows1).collect();
        let file = self.write_table(&format!("pair-{partner}-features.csv"), &all)?;
        let cal = vec![self.calibration(partner)?, self.calibration(Process::Strauss)?];
        Ok(self.report("pair", config, classes, cal, vec![file]))
    }

    /// Strauss against the partner: train on `n_train` per class, test on
    /// `n_test`.
    pub fn run_pair(&mut self) -> Result<ExperimentReport> {
        let config = self.config.clone();
        self.pair_with(&config)
    }

    /// [`Self::run_pair`] restricted to named features.
    pub fn run_subset(&mut self, features: &[String]) -> Result<ExperimentReport> {
        if features.is_empty() {
            return Err(ExperimentError::Config("feature subset is empty".into()));
        }
        let mut config = self.config.clone();
        config.features = features.to_vec();
        let config = config.validated()?;
        self.pair_with(&config)
    }

    /// Two arbitrary halves of the partner's sample against each other.
    pub fn run_same_model_split(&mut self) -> Result<ExperimentReport> {
        let config = self.config.clone();
        let (n_train, n_test) = config.split_counts()?;
        let partner = self.partner();
        let sample = self.sample(partner)?;
        let half = sample.summaries.len() / 2;
        let mut rows = sample.rows("sub1");
        let second = rows.split_off(half);
        let second: Vec<FeatureRow> = second
            .into_iter()
            .map(|r| FeatureRow {
                label: "sub2".into(),
                ..r
            })
            .collect();
        let classes = train_and_test(&config, &rows, &second, n_train, n_test)?;
        let all: Vec<FeatureRow> = rows.into_iter().chain(second).collect();
        let file = self.write_table(&format!("split-{partner}-features.csv"), &all)?;
        let cal = vec![self.calibration(partner)?];
        Ok(self.report("split", &config, classes, cal, vec![file]))
    }

    /// Both classes pooled into groups of five; the first `n_train / 5`
    /// groups train and the next `n_test / 5` test.
    pub fn run_pooled(&mut self) -> Result<ExperimentReport> {
        let config = self.config.clone();
        let (n_train, n_test) = config.pooled_counts()?;
        let partner = self.partner();
        let rows0 = self.sample(Process::Strauss)?.pooled_rows(Process::Strauss.tag())?;
        let rows1 = self.sample(partner)?.pooled_rows(partner.tag())?;
        let classes = train_and_test(&config, &rows0, &rows1, n_train, n_test)?;
        let all: Vec<FeatureRow> = rows0.into_iter().chain(rows1).collect();
        let file = self.write_table(&format!("pooled-{partner}-features.csv"), &all)?;
        let cal = vec![self.calibration(partner)?, self.calibration(Process::Strauss)?];
        Ok(self.report("pooled", &config, classes, cal, vec![file]))
    }

    /// Feature rows of the pairwise experiment, for scatter plots.
    pub fn pair_rows(&mut self, pooled: bool) -> Result<Vec<FeatureRow>> {
        let partner = self.partner();
        let mut out = Vec::new();
        for p in [Process::Strauss, partner] {
            let s = self.sample(p)?;
            out.extend(if pooled { s.pooled_rows(p.tag())? } else { s.rows(p.tag()) });
        }
        Ok(out)
    }
}

/// Train a classifier on labelled feature rows. Class 0 is the first label
/// in row order.
pub fn train_from_rows(config: &ExperimentConfig, rows: &[FeatureRow]) -> Result<(ClassifierModel, [String; 2])> {
    let labels = two_labels(rows)?;
    let cols = config.feature_columns();
    let names: Vec<&str> = config.features.iter().map(String::as_str).collect();
    let pick = |l: &str| -> Vec<Vec<f64>> {
        rows.iter()
            .filter(|r| r.label == l)
            .map(|r| select(&r.features, &cols))
            .collect()
    };
    let model = ClassifierModel::train(config.classifier_kind(), &pick(&labels[0]), &pick(&labels[1]), &names)
        .context(|| format!("training {}", config.classifier))?;
    Ok((model, labels))
}

/// The two distinct labels of `rows` in order of first appearance.
pub fn two_labels(rows: &[FeatureRow]) -> Result<[String; 2]> {
    let mut seen: Vec<&str> = Vec::new();
    for r in rows {
        if !seen.contains(&r.label.as_str()) {
            seen.push(&r.label);
        }
    }
    match seen.as_slice() {
        [a, b] => Ok([a.to_string(), b.to_string()]),
        _ => Err(ExperimentError::Config(format!("expected two labels, found {seen:?}"))),
    }
}
