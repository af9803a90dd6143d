//! Structured reports, feature tables and the text rendering of reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use discern_core::classify::{clopper_pearson, ConfusionCounts};
use discern_core::summarize::{FeatureVector, FEATURE_NAMES};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Context, ExperimentError, Result};
use crate::process::CalibrationRecord;

/// Confidence level of every interval in a report.
pub const CI_LEVEL: f64 = 0.95;

/// Misclassifications among `total` rows with their exact interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateWithCi {
    pub misclassified: usize,
    pub total: usize,
    pub rate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl RateWithCi {
    pub fn new(misclassified: usize, total: usize) -> Result<Self> {
        let (lo, hi) = clopper_pearson(misclassified, total, CI_LEVEL)
            .context(|| format!("interval for {misclassified}/{total}"))?;
        Ok(Self {
            misclassified,
            total,
            rate: misclassified as f64 / total as f64,
            ci_lower: lo,
            ci_upper: hi,
        })
    }

    /// Whether the stored interval is the one its counts imply.
    pub fn is_consistent(&self) -> bool {
        RateWithCi::new(self.misclassified, self.total).is_ok_and(|r| &r == self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub label: String,
    pub train: RateWithCi,
    pub test: RateWithCi,
}

pub fn class_results(labels: [&str; 2], train: &ConfusionCounts, test: &ConfusionCounts) -> Result<[ClassResult; 2]> {
    let one = |k: usize| -> Result<ClassResult> {
        Ok(ClassResult {
            label: labels[k].to_string(),
            train: RateWithCi::new(train.misclassified[k], train.total[k])?,
            test: RateWithCi::new(test.misclassified[k], test.total[k])?,
        })
    };
    Ok([one(0)?, one(1)?])
}

/// Outcome of one experiment: a single row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// `pair`, `split` or `pooled`.
    pub experiment: String,
    /// Row name: the non-Strauss process.
    pub case: String,
    pub classifier: String,
    pub features: Vec<String>,
    pub ci_level: f64,
    pub classes: [ClassResult; 2],
    pub calibration: Vec<CalibrationRecord>,
    /// Feature tables, relative to the report's directory.
    pub feature_files: Vec<String>,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(format!("bad report: {e}")))
    }

    pub fn is_consistent(&self) -> bool {
        self.classes.iter().all(|c| c.train.is_consistent() && c.test.is_consistent())
    }

    /// Write `<stem>.json` and `<stem>.txt` into `dir`; the text table is
    /// rendered from the JSON just written.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&json_path, self.to_json()).map_err(|e| ExperimentError::io(&json_path, e))?;
        let text = fs::read_to_string(&json_path).map_err(|e| ExperimentError::io(&json_path, e))?;
        let table = render_table(&text)?;
        let txt_path = dir.join(format!("{stem}.txt"));
        fs::write(&txt_path, table).map_err(|e| ExperimentError::io(&txt_path, e))
    }
}

fn fraction(r: &RateWithCi) -> String {
    format!("{}/{}", r.misclassified, r.total)
}

fn interval(r: &RateWithCi) -> String {
    format!("({:.3}, {:.3})", r.ci_lower, r.ci_upper)
}

/// Text table (case, per-class rates and intervals), rendered from a
/// report's JSON.
pub fn render_table(json: &str) -> Result<String> {
    let r = ExperimentReport::from_json(json)?;
    let [a, b] = &r.classes;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} experiment, {} on {} statistic{} ({})",
        r.experiment,
        r.classifier,
        r.features.len(),
        if r.features.len() == 1 { "" } else { "s" },
        r.features.join(", ")
    );
    let _ = writeln!(s, "master seed {}", r.config.seed);
    let _ = writeln!(s);
    let rows = [
        ("Case".to_string(), format!("MR {}", a.label), "CI".to_string(), format!("MR {}", b.label), "CI".to_string()),
        (r.case.clone(), fraction(&a.test), interval(&a.test), fraction(&b.test), interval(&b.test)),
        ("(training)".to_string(), fraction(&a.train), interval(&a.train), fraction(&b.train), interval(&b.train)),
    ];
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let w2 = rows.iter().map(|r| r.2.len()).max().unwrap_or(0);
    let w3 = rows.iter().map(|r| r.3.len()).max().unwrap_or(0);
    for (c0, c1, c2, c3, c4) in &rows {
        let line = format!("{c0:<w0$}  {c1:<w1$}  {c2:<w2$}  {c3:<w3$}  {c4}");
        let _ = writeln!(s, "{}", line.trim_end());
    }
    if !r.calibration.is_empty() {
        let _ = writeln!(s);
        for c in &r.calibration {
            let target = c.target_coverage.map_or("-".to_string(), |t| format!("{t:.4}"));
            let _ = writeln!(
                s,
                "calibration {:<8} {} = {:.6e}, target coverage {}, pilot coverage {:.4}",
                c.process.tag(),
                c.parameter,
                c.value,
                target,
                c.pilot_coverage
            );
        }
    }
    Ok(s)
}

/// One row of a feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub label: String,
    pub seed: u64,
    pub features: FeatureVector,
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["label", "seed"];
    h.extend(FEATURE_NAMES);
    h
}

/// Write rows as CSV with twelve significant digits.
pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let io = |e: csv::Error| ExperimentError::Io {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header()).map_err(io)?;
    for r in rows {
        let mut rec = vec![r.label.clone(), r.seed.to_string()];
        rec.extend(r.features.to_array().iter().map(|v| format!("{v:.11e}")));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let bad = |m: String| ExperimentError::Config(format!("{}: {m}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => ExperimentError::io(path, source),
        other => bad(format!("{other:?}")),
    })?;
    let head: Vec<String> = rd.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if head != header() {
        return Err(bad(format!("unexpected header {head:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: column {}: {e}", line + 2, header()[i])))
        };
        let seed = rec[1].parse::<u64>().map_err(|e| bad(format!("row {}: seed: {e}", line + 2)))?;
        let mut v = [0.0; 10];
        for (k, x) in v.iter_mut().enumerate() {
            *x = num(k + 2)?;
        }
        rows.push(FeatureRow {
            label: rec[0].to_string(),
            seed,
            features: FeatureVector::from_array(v),
        });
    }
    Ok(rows)
}

/// CSV of the label and two feature columns.
pub fn emit_scatter(rows: &[FeatureRow], columns: (&str, &str), path: &Path) -> Result<()> {
    let index = |name: &str| {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| ExperimentError::Config(format!("unknown column {name:?}")))
    };
    let (i, j) = (index(columns.0)?, index(columns.1)?);
    let io = |e: csv::Error| ExperimentError::Io {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["label", columns.0, columns.1]).map_err(io)?;
    for r in rows {
        let a = r.features.to_array();
        w.write_record([r.label.clone(), format!("{:.11e}", a[i]), format!("{:.11e}", a[j])])
            .map_err(io)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}
