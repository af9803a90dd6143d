use std::fs;
use std::path::{Path, PathBuf};

use discern_experiment::{Experiment, ExperimentConfig, ExperimentError, Process};

fn cache() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("pipeline-calibration")
}

fn small(partner: Process, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        partner,
        n_train: 30,
        n_test: 10,
        ..ExperimentConfig::default()
    }
}

fn experiment(config: ExperimentConfig, out: &Path) -> Experiment {
    Experiment::new(config, out).unwrap().with_calibration_dir(&cache())
}

#[test]
fn subset_of_all_features_equals_the_pair_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pair = experiment(small(Process::Dl, 3), a.path()).run_pair().unwrap();
    let names: Vec<String> = pair.features.iter().rev().cloned().collect();
    let subset = experiment(small(Process::Dl, 3), b.path()).run_subset(&names).unwrap();
    assert_eq!(pair.to_json(), subset.to_json());
    let file = &pair.feature_files[0];
    assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
}

#[test]
fn reports_carry_consistent_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        n_train: 60,
        n_test: 20,
        ..small(Process::Dl, 4)
    };
    let mut exp = experiment(config, dir.path());
    for r in [exp.run_pair().unwrap(), exp.run_same_model_split().unwrap(), exp.run_pooled().unwrap()] {
        assert!(r.is_consistent(), "{}", r.experiment);
        assert_eq!(r.classes[0].test.total + r.classes[0].train.total, r.classes[1].test.total + r.classes[1].train.total);
    }
    let pooled = exp.run_pooled().unwrap();
    assert_eq!((pooled.classes[0].train.total, pooled.classes[0].test.total), (12, 4));
    let split = exp.run_same_model_split().unwrap();
    assert_eq!((split.classes[1].train.total, split.classes[1].test.total), (30, 10));
    assert_eq!(split.classes.each_ref().map(|c| c.label.as_str()), ["sub1", "sub2"]);
}

#[test]
fn written_reports_render_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let r = experiment(small(Process::Dl, 5), dir.path()).run_pair().unwrap();
    r.write(dir.path(), "pair-dl").unwrap();
    let json = fs::read_to_string(dir.path().join("pair-dl.json")).unwrap();
    let txt = fs::read_to_string(dir.path().join("pair-dl.txt")).unwrap();
    assert_eq!(txt, discern_experiment::render_table(&json).unwrap());
    assert!(txt.contains("MR strauss"));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let json = pool.install(|| experiment(small(Process::Ssi, 6), dir.path()).run_pair().unwrap().to_json());
        let csv = fs::read(dir.path().join("pair-ssi-features.csv")).unwrap();
        (json, csv)
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn unknown_features_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let err = experiment(small(Process::Dl, 1), dir.path())
        .run_subset(&["alpha".into(), "gamma".into()])
        .unwrap_err();
    assert!(matches!(err, ExperimentError::Config(_)));
    assert_eq!(err.exit_code(), 2);
}
