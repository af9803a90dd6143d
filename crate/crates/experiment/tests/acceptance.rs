//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! to stderr, bypassing output capture, and then asserts.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{LazyLock, Mutex, MutexGuard};

use discern_core::classify::{clopper_pearson, LdaModel};
use discern_core::seed::{derive_seed, rng_from_seed};
use discern_core::simulate::{simulate_poisson, simulate_ssi, SsiParams};
use discern_core::summarize::nn_model::fit_nn_model_with_offset;
use discern_core::summarize::spectral::char_poly_coeffs;
use discern_core::summarize::{estimate_m1, fit_nn_model, legendre2, moment_estimates, third_cumulant, top_eigenvalues, Lag};
use discern_core::triangulate::{adjacency, delaunay, delaunay_with_frame, in_circle, triangle_count_spectral, AdjacencyMatrix};
use discern_core::{Point2, Realization, Window};
use discern_experiment::{Experiment, ExperimentConfig, ExperimentReport, Process};
use nalgebra::DMatrix;
use rand::Rng;

fn root() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

fn calibration_dir() -> PathBuf {
    root().join("calibration")
}

/// Experiments shared between criteria, keyed by (partner, master seed), so
/// that the split and pooled runs reuse the pair run's realizations.
static SUITE: LazyLock<Mutex<HashMap<(Process, u64), Experiment>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn suite() -> MutexGuard<'static, HashMap<(Process, u64), Experiment>> {
    SUITE.lock().unwrap_or_else(|e| e.into_inner())
}

fn with_experiment<T>(partner: Process, seed: u64, f: impl FnOnce(&mut Experiment) -> T) -> T {
    let mut s = suite();
    let exp = s.entry((partner, seed)).or_insert_with(|| {
        let config = ExperimentConfig {
            seed,
            partner,
            ..ExperimentConfig::default()
        };
        Experiment::new(config, &root().join(format!("{partner}-s{seed}")))
            .unwrap()
            .with_calibration_dir(&calibration_dir())
    });
    f(exp)
}

fn verdict(n: usize, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "\ncriterion {n}: {status} ({detail})");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn counts(r: &ExperimentReport) -> String {
    let side = |c: &discern_experiment::report::ClassResult| {
        format!(
            "{} {}/{} [{:.3}, {:.3}]",
            c.label, c.test.misclassified, c.test.total, c.test.ci_lower, c.test.ci_upper
        )
    };
    format!("{} {}: {}, {}", r.experiment, r.case, side(&r.classes[0]), side(&r.classes[1]))
}

#[test]
fn criterion_01_coverage_calibration() {
    let targets = [(Process::Dl, 0.24), (Process::Ssi, 0.39), (Process::Dg, 0.51)];
    let mut pass = true;
    let mut detail = Vec::new();
    for (p, target) in targets {
        let (sim, config) = with_experiment(p, 1, |e| (e.simulator(p).unwrap(), e.config().clone()));
        let (outer, inner) = (config.outer(), config.inner());
        let mean = (0..100u64)
            .map(|i| {
                let r = sim.realize(&outer, &inner, derive_seed(7, &format!("coverage-{p}"), i)).unwrap();
                estimate_m1(&r, 1.0, 0.1).unwrap()
            })
            .sum::<f64>()
            / 100.0;
        pass &= (mean - target).abs() <= 0.02;
        detail.push(format!("{p} {mean:.4} vs {target}"));
    }
    verdict(1, pass, &detail.join(", "));
}

#[test]
fn criterion_02_dg_pair_is_nearly_perfect() {
    let mut pass = true;
    let mut detail = Vec::new();
    for seed in [1, 2, 3] {
        let r = with_experiment(Process::Dg, seed, |e| e.run_pair().unwrap());
        pass &= r.classes.iter().all(|c| c.test.misclassified <= 2 && c.test.total == 100);
        detail.push(format!("seed {seed}: {}", counts(&r)));
    }
    verdict(2, pass, &detail.join("; "));
}

#[test]
fn criterion_03_dl_and_ssi_beat_guessing() {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in [Process::Dl, Process::Ssi] {
        let r = with_experiment(p, 1, |e| e.run_pair().unwrap());
        pass &= r.classes.iter().all(|c| c.test.rate < 0.35 && c.test.ci_upper < 0.5);
        detail.push(counts(&r));
    }
    verdict(3, pass, &detail.join("; "));
}

#[test]
fn criterion_04_same_model_split_is_guessing() {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in [Process::Dl, Process::Ssi, Process::Dg] {
        let r = with_experiment(p, 1, |e| e.run_same_model_split().unwrap());
        pass &= r
            .classes
            .iter()
            .all(|c| c.test.total == 50 && c.test.ci_lower <= 0.5 && 0.5 <= c.test.ci_upper);
        detail.push(counts(&r));
    }
    verdict(4, pass, &detail.join("; "));
}

#[test]
fn criterion_05_pooling_does_not_hurt() {
    let mut pass = true;
    let mut detail = Vec::new();
    let dg = with_experiment(Process::Dg, 1, |e| e.run_pooled().unwrap());
    pass &= dg.classes.iter().all(|c| c.test.misclassified == 0 && c.test.total == 20);
    detail.push(counts(&dg));
    for p in [Process::Dl, Process::Ssi] {
        let (pooled, single) = with_experiment(p, 1, |e| (e.run_pooled().unwrap(), e.run_pair().unwrap()));
        for k in 0..2 {
            pass &= pooled.classes[k].test.rate <= single.classes[k].test.rate;
        }
        detail.push(format!("{} vs {}", counts(&pooled), counts(&single)));
    }
    verdict(5, pass, &detail.join("; "));
}

#[test]
fn criterion_06_interval_goldens() {
    let goldens = [
        ((18, 100), (0.110, 0.270)),
        ((13, 100), (0.071, 0.210)),
        ((21, 100), (0.130, 0.303)),
        ((0, 100), (0.0, 0.030)),
        ((1, 20), (0.001, 0.250)),
        ((2, 20), (0.012, 0.320)),
        ((0, 20), (0.0, 0.139)),
    ];
    let mut misses = Vec::new();
    for ((k, n), (lo, hi)) in goldens {
        let (a, b) = clopper_pearson(k, n, 0.95).unwrap();
        if (a - lo).abs() > 0.001 || (b - hi).abs() > 0.001 {
            misses.push(format!("({k},{n}) gives ({a:.4}, {b:.4}), printed ({lo}, {hi})"));
        }
    }
    let detail = if misses.is_empty() {
        "all seven intervals within 0.001".to_string()
    } else {
        misses.join("; ")
    };
    verdict(6, misses.is_empty(), &detail);
}

fn random_points(n: usize, side: f64, seed: u64) -> Vec<Point2> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| Point2::new(side * rng.random::<f64>(), side * rng.random::<f64>()))
        .collect()
}

#[test]
fn criterion_07_geometry_oracle() {
    let mut violations = 0;
    let mut count_mismatch = 0;
    let mut checked = 0;
    let w = Window::square(10.0).unwrap();
    for seed in 0..200u64 {
        let n = 3 + (seed as usize * 7) % 58;
        let pts = random_points(n, 10.0, seed);
        let t = delaunay_with_frame(&pts).unwrap();
        for tri in &t.triangles {
            let [a, b, c] = tri.map(|i| t.vertices[i]);
            violations += t
                .vertices
                .iter()
                .enumerate()
                .filter(|(k, p)| !tri.contains(k) && in_circle(&a, &b, &c, p) > 0.0)
                .count();
        }
        let a = adjacency(&delaunay(&Realization::new(pts, w)).unwrap());
        if a.n() <= 64 {
            checked += 1;
            let c = char_poly_coeffs(&a).unwrap();
            if (-c[3] / 2.0 - triangle_count_spectral(&a) as f64).abs() > 1e-6 {
                count_mismatch += 1;
            }
        }
    }
    verdict(
        7,
        violations == 0 && count_mismatch == 0 && checked > 0,
        &format!("{violations} circumcircle violations, {count_mismatch}/{checked} triangle-count mismatches"),
    );
}

fn dense_top3(a: &AdjacencyMatrix) -> Vec<f64> {
    let m = DMatrix::from_row_slice(a.n(), a.n(), &a.to_dense());
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(3);
    ev
}

fn noiseless_distances(alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let y = (1.0 - i as f64 / (n + 1) as f64).ln();
            let f = |x: f64| alpha * x + beta * legendre2(x) - y;
            let (mut lo, mut hi) = (0.0f64, 50.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            2.0 + 0.5 * (lo + hi)
        })
        .collect()
}

#[test]
fn criterion_08_numerics() {
    let mut eig_err = 0.0f64;
    for k in 0..30u64 {
        let w = Window::square(10.0 + 1.2 * k as f64).unwrap();
        let a = adjacency(&delaunay(&simulate_poisson(&w, 0.5, 100 + k).unwrap()).unwrap());
        let got = top_eigenvalues(&a, 3).unwrap();
        for (g, d) in got.iter().zip(dense_top3(&a)) {
            eig_err = eig_err.max((g - d).abs());
        }
    }
    let mut fit_err = 0.0f64;
    for (alpha, beta, n) in [(-1.5, -0.4, 50), (-3.0, -0.2, 200)] {
        let fit = fit_nn_model(&noiseless_distances(alpha, beta, n)).unwrap();
        fit_err = fit_err.max((fit.alpha - alpha).abs()).max((fit.beta - beta).abs());
    }
    let hand = fit_nn_model_with_offset(&[3.0, 4.0], 2.0).unwrap();
    let hand_ok = (hand.alpha - -0.3233).abs() < 1e-4 && (hand.beta - -0.0822).abs() < 1e-4;
    let lda = LdaModel::train(&[vec![0.0], vec![2.0]], &[vec![4.0], vec![6.0]]).unwrap();
    let cut = lda.threshold / lda.weights[0];
    let pass = eig_err < 1e-8 && fit_err < 1e-10 && hand_ok && (cut - 3.0).abs() < 1e-9;
    verdict(
        8,
        pass,
        &format!(
            "eigen error {eig_err:.1e}, noiseless fit error {fit_err:.1e}, hand solve ({:.4}, {:.4}), LDA cut {cut}",
            hand.alpha, hand.beta
        ),
    );
}

#[test]
fn criterion_09_moment_identities() {
    let lags: Vec<Lag> = [0.5, 1.0, 1.5, 2.5, 4.0]
        .iter()
        .flat_map(|&d| [Lag::new(d, 0.0), Lag::new(0.0, d), Lag::new(d, d)])
        .collect();
    let pairs: Vec<(Lag, Lag)> = lags.iter().zip(lags.iter().skip(1)).map(|(a, b)| (*a, *b)).collect();
    let outer = Window::square(44.0).unwrap();
    let inner = Window::new(2.5, 2.5, 41.5, 41.5).unwrap();
    let p = SsiParams {
        hardcore: 2.0,
        target_n: 254,
        max_attempts: 10_000,
    };
    let mut bad = 0;
    for seed in 0..10 {
        let r = simulate_ssi(&outer, &p, seed).unwrap().realization.clipped(&inner);
        let m = moment_estimates(&r, 1.0, &lags, &pairs, 0.1).unwrap();
        bad += m.m2.iter().filter(|(_, v)| *v > m.m1).count();
        bad += m
            .m3
            .iter()
            .filter(|((a, b), v)| *v > m.m2_at(a).unwrap() || *v > m.m2_at(b).unwrap())
            .count();
    }
    let mut rng = rng_from_seed(9);
    let worst = (0..100)
        .map(|_| {
            let m1: f64 = rng.random();
            let m2 = m1 * m1;
            third_cumulant(m1, m2, m2, m2, m1 * m2).abs()
        })
        .fold(0.0f64, f64::max);
    verdict(
        9,
        bad == 0 && worst < 1e-12,
        &format!("{bad} ordering violations, max |kappa3| under independence {worst:.1e}"),
    );
}

#[test]
fn criterion_10_determinism_across_jobs() {
    let bin = env!("CARGO_BIN_EXE_discern");
    let base = root().join("determinism");
    let _ = fs::remove_dir_all(&base);
    fs::create_dir_all(&base).unwrap();
    let config = base.join("config.toml");
    fs::write(&config, "partner = \"dg\"\nn_train = 40\nn_test = 20\n").unwrap();
    // start both runs from the shared calibration records
    with_experiment(Process::Dg, 1, |e| e.calibration(Process::Strauss).unwrap());
    let run = |jobs: &str| -> (Vec<u8>, Vec<u8>) {
        let out = base.join(format!("jobs{jobs}"));
        let cal = out.join("calibration");
        fs::create_dir_all(&cal).unwrap();
        for entry in fs::read_dir(calibration_dir()).unwrap() {
            let path = entry.unwrap().path();
            fs::copy(&path, cal.join(path.file_name().unwrap())).unwrap();
        }
        let status = Command::new(bin)
            .args(["pair", "--seed", "11", "--jobs", jobs, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        (
            fs::read(out.join("pair-dg.json")).unwrap(),
            fs::read(out.join("pair-dg-features.csv")).unwrap(),
        )
    };
    let (a, b) = (run("1"), run("8"));
    verdict(
        10,
        a == b,
        &format!("report {} bytes, features {} bytes, identical: {}", a.0.len(), a.1.len(), a == b),
    );
}
