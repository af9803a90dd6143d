//! Nearest-neighbour distribution function and its log-survival regression.
//!
//! `log(1 - G(r))` is regressed, without intercept, on `r - h` and on the
//! second Legendre polynomial of `r - h`, where `h` is the hard-core
//! distance. The slope, Legendre coefficient and residual scale summarize a
//! realization.

use crate::error::{Error, Result};
use crate::geometry::HARDCORE;

/// Empirical nearest-neighbour distribution at the observed distances.
#[derive(Debug, Clone, PartialEq)]
pub struct GEstimate {
    pub r_values: Vec<f64>,
    pub g_values: Vec<f64>,
}

/// Plotting-position estimate `G(d_(i)) = i / (n + 1)` with no edge
/// correction.
pub fn estimate_g(dists: &[f64]) -> Result<GEstimate> {
    if dists.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: dists.len(),
        });
    }
    Ok(plotting_positions(dists))
}

fn plotting_positions(dists: &[f64]) -> GEstimate {
    let mut r_values = dists.to_vec();
    r_values.sort_by(f64::total_cmp);
    let denom = (r_values.len() + 1) as f64;
    let g_values = (1..=r_values.len()).map(|i| i as f64 / denom).collect();
    GEstimate { r_values, g_values }
}

/// `(3 x^2 - 1) / 2`.
pub fn legendre2(x: f64) -> f64 {
    0.5 * (3.0 * x * x - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnModelFit {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub n_distances: usize,
}

/// Least-squares fit of the log-survival model with hard core 2.
pub fn fit_nn_model(dists: &[f64]) -> Result<NnModelFit> {
    if dists.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: dists.len(),
        });
    }
    fit_nn_model_with_offset(dists, HARDCORE)
}

/// Fit with an arbitrary hard-core offset. Two distances are accepted here
/// (exact solve, `sigma = 0`); the public entry point requires three.
pub fn fit_nn_model_with_offset(dists: &[f64], offset: f64) -> Result<NnModelFit> {
    if dists.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: dists.len(),
        });
    }
    let g = plotting_positions(dists);
    let rows: Vec<(f64, f64, f64)> = g
        .r_values
        .iter()
        .zip(&g.g_values)
        .map(|(&r, &gv)| {
            let x = r - offset;
            (x, legendre2(x), (1.0 - gv).ln())
        })
        .collect();

    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in &rows {
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.is_finite()) || det <= 1e-12 * s11 * s22 || s11 == 0.0 || s22 == 0.0 {
        return Err(Error::DegenerateDesign(
            "nearest-neighbour regressors are collinear (all distances equal?)".into(),
        ));
    }
    let alpha = (s22 * b1 - s12 * b2) / det;
    let beta = (s11 * b2 - s12 * b1) / det;

    let n = rows.len();
    let sigma = if n > 2 {
        let rss: f64 = rows
            .iter()
            .map(|&(x1, x2, y)| {
                let e = y - alpha * x1 - beta * x2;
                e * e
            })
            .sum();
        (rss / (n - 2) as f64).sqrt()
    } else {
        0.0
    };
    Ok(NnModelFit {
        alpha,
        beta,
        sigma,
        n_distances: n,
    })
}
