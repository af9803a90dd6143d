//! Process parameters, activity calibration and the calibration cache.

use std::fs;
use std::path::{Path, PathBuf};

use discern_core::seed::derive_seed;
use discern_core::simulate::{
    calibrate_activity, calibrate_ssi_target, simulate_dead_leaves, simulate_ssi, CalibrationOptions,
    DeadLeavesParams, DiggleGrattonParams, GibbsModel, SsiParams, StraussHcParams,
};
use discern_core::summarize::estimate_m1;
use discern_core::{Realization, Window};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Process};
use crate::error::{Context, ExperimentError, Result};

/// A fully parameterized simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Simulator {
    DeadLeaves(DeadLeavesParams),
    Ssi(SsiParams),
    Gibbs(GibbsModel),
}

impl Simulator {
    /// Simulate on `outer` and clip to `inner`.
    pub fn realize(&self, outer: &Window, inner: &Window, seed: u64) -> discern_core::Result<Realization> {
        let r = match self {
            Simulator::DeadLeaves(p) => simulate_dead_leaves(outer, p, seed)?,
            Simulator::Ssi(p) => simulate_ssi(outer, p, seed)?.realization,
            Simulator::Gibbs(m) => m.simulate(outer, seed)?,
        };
        Ok(r.clipped(inner).with_seed(seed))
    }
}

/// Outcome of calibrating one process, as stored in the cache and echoed
/// in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub process: Process,
    /// Tuned quantity: `activity`, `target_n`, or `none` for dead leaves.
    pub parameter: String,
    pub value: f64,
    pub target_coverage: Option<f64>,
    /// Mean pilot coverage at the chosen value.
    pub pilot_coverage: f64,
    pub evaluations: usize,
    /// Every input that influenced the result; a cached record is reused
    /// only when this matches.
    pub fingerprint: String,
}

fn options(c: &ExperimentConfig, tol: f64) -> CalibrationOptions {
    CalibrationOptions {
        pilots: c.calibration.pilots,
        tol,
        grid_step: c.calibration.grid_step,
        coverage_radius: c.calibration.coverage_radius,
        ..CalibrationOptions::default()
    }
}

fn dl_params(c: &ExperimentConfig) -> DeadLeavesParams {
    DeadLeavesParams {
        disc_radius: c.dl.disc_radius,
        saturation_margin: c.dl.saturation_margin,
    }
}

fn dg_model(c: &ExperimentConfig, activity: f64) -> GibbsModel {
    GibbsModel::DiggleGratton(DiggleGrattonParams {
        activity,
        delta: c.dg.delta,
        rho: c.dg.rho,
        kappa: c.dg.kappa,
        sweeps: c.dg.sweeps,
    })
}

fn strauss_model(c: &ExperimentConfig, activity: f64) -> GibbsModel {
    GibbsModel::Strauss(StraussHcParams {
        activity,
        interaction: c.strauss.interaction,
        range: c.strauss.range,
        hardcore: c.hardcore,
        sweeps: c.strauss.sweeps,
    })
}

/// The simulator a calibration record describes.
pub fn simulator_for(c: &ExperimentConfig, rec: &CalibrationRecord) -> Simulator {
    match rec.process {
        Process::Dl => Simulator::DeadLeaves(dl_params(c)),
        Process::Ssi => Simulator::Ssi(SsiParams {
            hardcore: c.hardcore,
            target_n: rec.value as usize,
            max_attempts: c.ssi.max_attempts,
        }),
        Process::Dg => Simulator::Gibbs(dg_model(c, rec.value)),
        Process::Strauss => Simulator::Gibbs(strauss_model(c, rec.value)),
    }
}

fn mean_pilot_coverage(c: &ExperimentConfig, sim: &Simulator) -> discern_core::Result<f64> {
    let (outer, inner) = (c.outer(), c.inner());
    let values: Vec<f64> = (0..c.calibration.pilots)
        .into_par_iter()
        .map(|k| {
            let r = sim.realize(&outer, &inner, derive_seed(c.calibration.seed, "pilot", k as u64))?;
            estimate_m1(&r, c.calibration.coverage_radius, c.calibration.grid_step)
        })
        .collect::<discern_core::Result<_>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn cache_name(c: &ExperimentConfig, process: Process, target: Option<f64>) -> String {
    let mut s = format!("{}-s{}-m{}", process.tag(), c.outer_side, c.margin);
    if let Some(t) = target {
        s.push_str(&format!("-c{t:.6}"));
    }
    s + ".json"
}

fn fingerprint(c: &ExperimentConfig, process: Process, target: Option<f64>) -> String {
    let cal = &c.calibration;
    let common = format!(
        "outer={} margin={} hardcore={} pilots={} seed={} grid={} radius={}",
        c.outer_side, c.margin, c.hardcore, cal.pilots, cal.seed, cal.grid_step, cal.coverage_radius
    );
    let specific = match process {
        Process::Dl => format!("{:?}", dl_params(c)),
        Process::Ssi => format!("tol={}", cal.tol),
        Process::Dg => format!("{:?} tol={}", dg_model(c, 0.0), cal.tol),
        Process::Strauss => format!("{:?} tol={}", strauss_model(c, 0.0), cal.match_tol),
    };
    format!("{} target={target:?} {common} {specific}", process.tag())
}

fn read_cached(path: &Path, fingerprint: &str) -> Option<CalibrationRecord> {
    let text = fs::read_to_string(path).ok()?;
    let rec: CalibrationRecord = serde_json::from_str(&text).ok()?;
    (rec.fingerprint == fingerprint).then_some(rec)
}

fn write_cached(path: &Path, rec: &CalibrationRecord) -> Result<()> {
    let dir = path.parent().expect("cache file has a parent");
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    // write then rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let text = serde_json::to_string_pretty(rec).expect("record serializes");
    fs::write(&tmp, text).map_err(|e| ExperimentError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| ExperimentError::io(path, e))
}

fn calibrate_uncached(
    c: &ExperimentConfig,
    process: Process,
    target: Option<f64>,
    fingerprint: String,
) -> Result<CalibrationRecord> {
    let (outer, inner) = (c.outer(), c.inner());
    let cal = &c.calibration;
    let what = || format!("calibrating {process}");
    let (parameter, value, pilot_coverage, evaluations) = match process {
        Process::Dl => {
            let cov = mean_pilot_coverage(c, &Simulator::DeadLeaves(dl_params(c))).context(what)?;
            ("none", 0.0, cov, 1)
        }
        Process::Ssi => {
            let t = target.expect("ssi has a target");
            let r = calibrate_ssi_target(&outer, &inner, t, c.hardcore, &options(c, cal.tol), cal.seed).context(what)?;
            ("target_n", r.target_n as f64, r.coverage, r.evaluations)
        }
        Process::Dg | Process::Strauss => {
            let (model, tol) = if process == Process::Dg {
                (dg_model(c, 1.0), cal.tol)
            } else {
                (strauss_model(c, 1.0), cal.match_tol)
            };
            let t = target.expect("gibbs processes have a target");
            let r = calibrate_activity(&model, &outer, &inner, t, &options(c, tol), cal.seed).context(what)?;
            ("activity", r.activity, r.coverage, r.evaluations)
        }
    };
    Ok(CalibrationRecord {
        process,
        parameter: parameter.into(),
        value,
        target_coverage: target,
        pilot_coverage,
        evaluations,
        fingerprint,
    })
}

/// Calibrates processes, caching records under `cache_dir` when given.
#[derive(Debug, Clone)]
pub struct Calibrator {
    cache_dir: Option<PathBuf>,
}

impl Calibrator {
    pub fn new(cache_dir: Option<PathBuf>) -> Self {
        Self { cache_dir }
    }

    fn get(&self, c: &ExperimentConfig, process: Process, target: Option<f64>) -> Result<CalibrationRecord> {
        let fp = fingerprint(c, process, target);
        let path = self.cache_dir.as_ref().map(|d| d.join(cache_name(c, process, target)));
        if let Some(rec) = path.as_deref().and_then(|p| read_cached(p, &fp)) {
            return Ok(rec);
        }
        let rec = calibrate_uncached(c, process, target, fp)?;
        if let Some(p) = &path {
            write_cached(p, &rec)?;
        }
        Ok(rec)
    }

    /// Calibration of a non-Strauss process to its configured coverage.
    pub fn partner(&self, c: &ExperimentConfig, process: Process) -> Result<CalibrationRecord> {
        let target = match process {
            Process::Dl => None,
            Process::Ssi => Some(c.ssi.coverage),
            Process::Dg => Some(c.dg.coverage),
            Process::Strauss => {
                return Err(ExperimentError::Config("strauss is calibrated against a partner".into()))
            }
        };
        self.get(c, process, target)
    }

    /// Strauss activity matched to the partner's achieved pilot coverage.
    pub fn strauss_for(&self, c: &ExperimentConfig, partner: &CalibrationRecord) -> Result<CalibrationRecord> {
        self.get(c, Process::Strauss, Some(partner.pilot_coverage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_names_separate_targets() {
        let c = ExperimentConfig::default();
        assert_eq!(cache_name(&c, Process::Dl, None), "dl-s44-m2.5.json");
        assert_eq!(cache_name(&c, Process::Dg, Some(0.51)), "dg-s44-m2.5-c0.510000.json");
        assert_ne!(fingerprint(&c, Process::Dg, Some(0.51)), fingerprint(&c, Process::Dg, Some(0.5)));
    }

    #[test]
    fn stale_cache_entries_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        let rec = CalibrationRecord {
            process: Process::Ssi,
            parameter: "target_n".into(),
            value: 254.0,
            target_coverage: Some(0.39),
            pilot_coverage: 0.388,
            evaluations: 3,
            fingerprint: "a".into(),
        };
        write_cached(&path, &rec).unwrap();
        assert_eq!(read_cached(&path, "a"), Some(rec));
        assert_eq!(read_cached(&path, "b"), None);
    }

    #[test]
    fn simulator_uses_the_recorded_value() {
        let c = ExperimentConfig::default();
        let rec = CalibrationRecord {
            process: Process::Ssi,
            parameter: "target_n".into(),
            value: 20.0,
            target_coverage: Some(0.39),
            pilot_coverage: 0.0,
            evaluations: 0,
            fingerprint: String::new(),
        };
        let r = simulator_for(&c, &rec).realize(&c.outer(), &c.inner(), 5).unwrap();
        assert!(r.len() <= 20);
        assert_eq!(r.window, c.inner());
        assert_eq!(r.seed, 5);
    }
}
