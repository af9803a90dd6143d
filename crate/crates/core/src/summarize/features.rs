//! The ten-statistic summary of a realization or of a pooled group.

use crate::error::{Error, Result};
use crate::geometry::{nn_distances, Realization};
use crate::triangulate::{adjacency, delaunay};

use super::nn_model::fit_nn_model;
use super::spectral::top_eigenvalues;
use super::tessellation::triangulation_summary;

/// Column names in feature-vector order.
pub const FEATURE_NAMES: [&str; 10] = [
    "alpha",
    "beta",
    "sigma",
    "tri_density",
    "max_side",
    "max_angle",
    "max_area",
    "eig1",
    "eig2",
    "eig3",
];

/// Realizations per pooled group.
pub const POOL_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub tri_density: f64,
    pub max_side: f64,
    pub max_angle: f64,
    pub max_area: f64,
    pub eig1: f64,
    pub eig2: f64,
    pub eig3: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.alpha,
            self.beta,
            self.sigma,
            self.tri_density,
            self.max_side,
            self.max_angle,
            self.max_area,
            self.eig1,
            self.eig2,
            self.eig3,
        ]
    }

    pub fn from_array(v: [f64; 10]) -> Self {
        Self {
            alpha: v[0],
            beta: v[1],
            sigma: v[2],
            tri_density: v[3],
            max_side: v[4],
            max_angle: v[5],
            max_area: v[6],
            eig1: v[7],
            eig2: v[8],
            eig3: v[9],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Column index of a feature name.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Per-realization intermediate results kept for pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationSummary {
    pub nn_distances: Vec<f64>,
    pub features: FeatureVector,
}

/// Compute all statistics of one realization. Points are put in
/// lexicographic order first, so the result does not depend on input order.
pub fn summarize_realization(r: &Realization) -> Result<RealizationSummary> {
    let mut canonical = r.clone();
    canonical
        .points
        .sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let nn = nn_distances(&canonical)?;
    let fit = fit_nn_model(&nn)?;
    let tri = delaunay(&canonical)?;
    let tri_stats = triangulation_summary(&tri, &canonical.window)?;
    let eig = top_eigenvalues(&adjacency(&tri), 3)?;
    let features = FeatureVector {
        alpha: fit.alpha,
        beta: fit.beta,
        sigma: fit.sigma,
        tri_density: tri_stats.tri_density,
        max_side: tri_stats.max_side,
        max_angle: tri_stats.max_angle,
        max_area: tri_stats.max_area,
        eig1: eig[0],
        eig2: eig[1],
        eig3: eig[2],
    };
    if !features.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "non-finite feature vector for realization seed {}",
            r.seed
        )));
    }
    Ok(RealizationSummary {
        nn_distances: nn,
        features,
    })
}

pub fn feature_vector(r: &Realization) -> Result<FeatureVector> {
    summarize_realization(r).map(|s| s.features)
}

/// Pool summaries: the nearest-neighbour model is refit on all distances
/// together; the other seven entries are the minima over the group.
pub fn pool_summaries(group: &[RealizationSummary]) -> Result<FeatureVector> {
    if group.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let all: Vec<f64> = group.iter().flat_map(|s| s.nn_distances.iter().copied()).collect();
    let fit = fit_nn_model(&all)?;
    let mut v = group[0].features.to_array();
    for s in &group[1..] {
        let a = s.features.to_array();
        for k in 3..10 {
            v[k] = v[k].min(a[k]);
        }
    }
    v[0] = fit.alpha;
    v[1] = fit.beta;
    v[2] = fit.sigma;
    Ok(FeatureVector::from_array(v))
}

pub fn pooled_feature_vector(rs: &[Realization]) -> Result<FeatureVector> {
    if rs.len() != POOL_SIZE {
        return Err(Error::InvalidParameter(format!(
            "pooling needs exactly {POOL_SIZE} realizations, got {}",
            rs.len()
        )));
    }
    let summaries = rs.iter().map(summarize_realization).collect::<Result<Vec<_>>>()?;
    pool_summaries(&summaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary_with(max_area: f64) -> RealizationSummary {
        RealizationSummary {
            nn_distances: vec![2.1, 2.4, 2.2, 3.0, 2.7],
            features: FeatureVector::from_array([0.0, 0.0, 0.0, 1.0, 4.0, 2.0, max_area, 6.0, 5.0, 4.0]),
        }
    }

    #[test]
    fn pooled_entries_are_minima() {
        let group: Vec<_> = [3.0, 4.0, 5.0, 6.0, 7.0].iter().map(|&a| summary_with(a)).collect();
        let v = pool_summaries(&group).unwrap();
        assert_eq!(v.max_area, 3.0);
        assert_eq!(v.eig1, 6.0);
    }

    #[test]
    fn feature_names_round_trip() {
        for (i, n) in FEATURE_NAMES.iter().enumerate() {
            assert_eq!(feature_index(n), Some(i));
        }
        assert_eq!(feature_index("gamma"), None);
    }

    #[test]
    fn pooling_requires_five() {
        assert!(pooled_feature_vector(&[]).is_err());
    }
}
