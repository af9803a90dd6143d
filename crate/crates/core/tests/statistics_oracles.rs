use discern_core::seed::rng_from_seed;
use discern_core::simulate::{simulate_poisson, simulate_ssi, SsiParams};
use discern_core::summarize::{
    feature_vector, fit_nn_model, legendre2, moment_estimates, resistance_summary, third_cumulant,
    top_eigenvalues, triangulation_summary, Lag,
};
use discern_core::triangulate::{adjacency, delaunay, AdjacencyMatrix};
use discern_core::{Point2, Realization, Window};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn ssi(side: f64, n: usize, seed: u64) -> Realization {
    let w = Window::square(side).unwrap();
    let p = SsiParams {
        hardcore: 2.0,
        target_n: n,
        max_attempts: 10_000,
    };
    simulate_ssi(&w, &p, seed).unwrap().realization
}

fn oracle_top3(a: &AdjacencyMatrix) -> Vec<f64> {
    let n = a.n();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense());
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(3);
    ev
}

#[test]
fn top_eigenvalues_match_dense_oracle() {
    for k in 0..30u64 {
        let mut rng = rng_from_seed(k);
        let a = if k % 2 == 0 {
            // triangulation graphs, some beyond the dense-solver limit
            let w = Window::square(10.0 + 1.2 * k as f64).unwrap();
            let r = simulate_poisson(&w, 0.5, k).unwrap();
            adjacency(&delaunay(&r).unwrap())
        } else {
            let n = 5 + rng.random_range(0..600);
            let p = 6.0 / n as f64;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..i {
                    if rng.random::<f64>() < p {
                        edges.push([j, i]);
                    }
                }
            }
            AdjacencyMatrix::from_edges(n, &edges)
        };
        let got = top_eigenvalues(&a, 3).unwrap();
        let want = oracle_top3(&a);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8, "matrix {k} (n = {}): {got:?} vs {want:?}", a.n());
        }
    }
}

/// Distances whose plotting positions satisfy the model exactly.
fn noiseless_distances(alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let y = (1.0 - i as f64 / (n + 1) as f64).ln();
            let f = |x: f64| alpha * x + beta * legendre2(x) - y;
            let (mut lo, mut hi) = (0.0f64, 50.0f64);
            assert!(f(lo) > 0.0 && f(hi) < 0.0);
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
fn nn_fit_recovers_noiseless_parameters() {
    for (alpha, beta, n) in [(-1.5, -0.4, 50), (-3.0, -0.2, 200), (-0.8, -0.9, 17)] {
        let mut d = noiseless_distances(alpha, beta, n);
        d.reverse();
        let fit = fit_nn_model(&d).unwrap();
        assert!((fit.alpha - alpha).abs() < 1e-10, "{fit:?}");
        assert!((fit.beta - beta).abs() < 1e-10, "{fit:?}");
        assert!(fit.sigma < 1e-10);
    }
}

#[test]
fn triangulation_summary_scales_with_the_pattern() {
    let r = ssi(20.0, 60, 5);
    let s = 2.5;
    let scaled = Realization::new(
        r.points.iter().map(|p| Point2::new(s * p.x, s * p.y)).collect(),
        Window::square(20.0 * s).unwrap(),
    );
    let a = triangulation_summary(&delaunay(&r).unwrap(), &r.window).unwrap();
    let b = triangulation_summary(&delaunay(&scaled).unwrap(), &scaled.window).unwrap();
    assert!((b.max_side - s * a.max_side).abs() < 1e-9 * b.max_side);
    assert!((b.max_area - s * s * a.max_area).abs() < 1e-9 * b.max_area);
    assert!((b.tri_density * s * s - a.tri_density).abs() < 1e-12);
    assert!((b.max_angle - a.max_angle).abs() < 1e-12);
}

#[test]
fn quarter_turn_swaps_resistances() {
    for seed in 0..5 {
        let r = ssi(30.0, 150, seed);
        let l = 30.0;
        let turned = Realization::new(
            r.points.iter().map(|p| Point2::new(l - p.y, p.x)).collect(),
            r.window,
        );
        let a = resistance_summary(&delaunay(&r).unwrap(), &r.window, 3.0).unwrap();
        let b = resistance_summary(&delaunay(&turned).unwrap(), &turned.window, 3.0).unwrap();
        assert!((a.r_horizontal - b.r_vertical).abs() < 1e-9 * a.r_horizontal, "{a:?} {b:?}");
        assert!((a.r_vertical - b.r_horizontal).abs() < 1e-9 * a.r_vertical, "{a:?} {b:?}");
        assert!((a.anisotropy * b.anisotropy - 1.0).abs() < 1e-9);
    }
}

#[test]
fn shared_grid_moments_are_ordered() {
    let lags: Vec<Lag> = [0.5, 1.0, 1.5, 2.5, 4.0]
        .iter()
        .flat_map(|&d| [Lag::new(d, 0.0), Lag::new(0.0, d), Lag::new(d, d)])
        .collect();
    let pairs: Vec<(Lag, Lag)> = lags.iter().zip(lags.iter().skip(1)).map(|(a, b)| (*a, *b)).collect();
    for seed in 0..10 {
        let r = ssi(44.0, 250, seed).clipped(&Window::new(2.5, 2.5, 41.5, 41.5).unwrap());
        let m = moment_estimates(&r, 1.0, &lags, &pairs, 0.2).unwrap();
        assert!(m.m1 <= 1.0);
        for (lag, v) in &m.m2 {
            assert!(*v <= m.m1, "seed {seed} lag {lag:?}");
        }
        for ((a, b), v) in &m.m3 {
            assert!(*v <= m.m2_at(a).unwrap() && *v <= m.m2_at(b).unwrap(), "seed {seed}");
        }
        for (_, k) in &m.kappa3 {
            assert!(k.abs() <= 2.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cumulant_vanishes_under_independence(m1 in 0.0f64..=1.0) {
        let m2 = m1 * m1;
        prop_assert!(third_cumulant(m1, m2, m2, m2, m1 * m2).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn features_do_not_depend_on_point_order(seed in 0u64..1000, shuffle in any::<u64>()) {
        let r = ssi(25.0, 70, seed);
        let mut shuffled = r.clone();
        shuffled.points.shuffle(&mut rng_from_seed(shuffle));
        prop_assert_eq!(feature_vector(&r).unwrap(), feature_vector(&shuffled).unwrap());
    }
}
