//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use discern_core::classify::ClassifierKind;
use discern_core::summarize::{feature_index, FEATURE_NAMES, POOL_SIZE};
use discern_core::Window;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Strauss,
    Dl,
    Ssi,
    Dg,
}

impl Process {
    pub const ALL: [Process; 4] = [Process::Strauss, Process::Dl, Process::Ssi, Process::Dg];

    /// Lowercase tag used for labels, seeds and file names.
    pub fn tag(&self) -> &'static str {
        match self {
            Process::Strauss => "strauss",
            Process::Dl => "dl",
            Process::Ssi => "ssi",
            Process::Dg => "dg",
        }
    }

    /// Row name in report tables.
    pub fn case_name(&self) -> &'static str {
        match self {
            Process::Strauss => "Strauss",
            Process::Dl => "DL",
            Process::Ssi => "SSI",
            Process::Dg => "DG",
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Process {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Process::ALL
            .into_iter()
            .find(|p| p.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| ExperimentError::Config(format!("unknown process {s:?} (strauss, dl, ssi, dg)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StraussConfig {
    pub interaction: f64,
    pub range: f64,
    pub sweeps: usize,
}

impl Default for StraussConfig {
    fn default() -> Self {
        Self {
            interaction: 0.5,
            range: 3.0,
            sweeps: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgConfig {
    pub delta: f64,
    pub rho: f64,
    pub kappa: f64,
    pub sweeps: usize,
    pub coverage: f64,
}

impl Default for DgConfig {
    fn default() -> Self {
        Self {
            delta: 2.0,
            rho: 1.0,
            kappa: 3.0,
            sweeps: 500,
            coverage: 0.51,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsiConfig {
    pub coverage: f64,
    pub max_attempts: usize,
}

impl Default for SsiConfig {
    fn default() -> Self {
        Self {
            coverage: 0.39,
            max_attempts: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DlConfig {
    pub disc_radius: f64,
    pub saturation_margin: f64,
}

impl Default for DlConfig {
    fn default() -> Self {
        Self {
            disc_radius: 1.0,
            saturation_margin: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Seed of the pilot streams; independent of the master seed so that
    /// calibrations can be cached across experiments.
    pub seed: u64,
    pub pilots: usize,
    /// Tolerance for the partner process's coverage target.
    pub tol: f64,
    /// Tolerance when matching the Strauss coverage to the partner's.
    pub match_tol: f64,
    pub grid_step: f64,
    pub coverage_radius: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            pilots: 24,
            tol: 0.02,
            match_tol: 0.005,
            grid_step: 0.1,
            coverage_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// The process compared against hard-core Strauss.
    pub partner: Process,
    pub classifier: String,
    /// Realizations per class used for training and testing.
    pub n_train: usize,
    pub n_test: usize,
    /// Feature subset; empty means all ten.
    pub features: Vec<String>,
    pub outer_side: f64,
    pub margin: f64,
    pub hardcore: f64,
    pub strauss: StraussConfig,
    pub dg: DgConfig,
    pub ssi: SsiConfig,
    pub dl: DlConfig,
    pub calibration: CalibrationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            partner: Process::Dg,
            classifier: "lda".into(),
            n_train: 300,
            n_test: 100,
            features: Vec::new(),
            outer_side: 44.0,
            margin: 2.5,
            hardcore: 2.0,
            strauss: StraussConfig::default(),
            dg: DgConfig::default(),
            ssi: SsiConfig::default(),
            dl: DlConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(ExperimentError::Config(msg()))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        c.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check invariants and put the feature list in canonical form (all ten
    /// names when empty, column order otherwise).
    pub fn validated(mut self) -> Result<Self> {
        check(self.n_train >= 1 && self.n_test >= 1, || {
            format!("n_train = {} and n_test = {} must be at least 1", self.n_train, self.n_test)
        })?;
        check(self.partner != Process::Strauss, || "partner must be dl, ssi or dg".into())?;
        ClassifierKind::parse(&self.classifier).map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.features = canonical_features(&self.features)?;
        check(self.outer_side > 2.0 * self.margin && self.margin >= 0.0, || {
            format!("margin {} does not fit in side {}", self.margin, self.outer_side)
        })?;
        check(self.hardcore > 0.0, || "hardcore must be positive".into())?;
        check(
            self.calibration.tol > 0.0 && self.calibration.match_tol > 0.0 && self.calibration.grid_step > 0.0,
            || "calibration tolerances and grid step must be positive".into(),
        )?;
        check(self.calibration.pilots >= 20, || "calibration needs at least 20 pilots".into())?;
        for (name, c) in [("ssi", self.ssi.coverage), ("dg", self.dg.coverage)] {
            check(c > 0.0 && c < 1.0, || format!("{name}.coverage {c} not in (0, 1)"))?;
        }
        Ok(self)
    }

    pub fn classifier_kind(&self) -> ClassifierKind {
        ClassifierKind::parse(&self.classifier).expect("validated")
    }

    pub fn outer(&self) -> Window {
        Window::square(self.outer_side).expect("validated")
    }

    pub fn inner(&self) -> Window {
        let m = self.margin;
        Window::new(m, m, self.outer_side - m, self.outer_side - m).expect("validated")
    }

    /// Column indices of the selected features.
    pub fn feature_columns(&self) -> Vec<usize> {
        self.features
            .iter()
            .map(|n| feature_index(n).expect("validated"))
            .collect()
    }

    /// Pooled groups per class for training and testing.
    pub fn pooled_counts(&self) -> Result<(usize, usize)> {
        check(self.n_train % POOL_SIZE == 0 && self.n_test % POOL_SIZE == 0, || {
            format!("pooling needs n_train and n_test divisible by {POOL_SIZE}")
        })?;
        Ok((self.n_train / POOL_SIZE, self.n_test / POOL_SIZE))
    }

    /// Per-half counts for the same-model split.
    pub fn split_counts(&self) -> Result<(usize, usize)> {
        check(self.n_train % 2 == 0 && self.n_test % 2 == 0, || {
            "the same-model split needs even n_train and n_test".into()
        })?;
        Ok((self.n_train / 2, self.n_test / 2))
    }
}

/// Validate names and return them in feature-vector order; empty input
/// selects all ten.
pub fn canonical_features(names: &[String]) -> Result<Vec<String>> {
    if names.is_empty() {
        return Ok(FEATURE_NAMES.iter().map(|s| s.to_string()).collect());
    }
    let mut idx = Vec::new();
    for n in names {
        let i = feature_index(n.trim())
            .ok_or_else(|| ExperimentError::Config(format!("unknown feature {n:?}")))?;
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| FEATURE_NAMES[i].to_string()).collect())
}

pub fn parse_feature_list(list: &str) -> Result<Vec<String>> {
    let names: Vec<String> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    if names.is_empty() {
        return Err(ExperimentError::Config("empty feature list".into()));
    }
    canonical_features(&names)
}
