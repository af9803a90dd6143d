//! Descriptive statistics of a realization.

pub mod features;
pub mod moments;
pub mod nn_model;
pub mod resistance;
pub mod spectral;
pub mod tessellation;

pub use features::{
    feature_index, feature_vector, pool_summaries, pooled_feature_vector, summarize_realization,
    FeatureVector, RealizationSummary, FEATURE_NAMES, POOL_SIZE,
};
pub use moments::{
    estimate_m1, estimate_m2, estimate_m3, moment_estimates, third_cumulant, Lag, MomentEstimates,
};
pub use nn_model::{estimate_g, fit_nn_model, legendre2, GEstimate, NnModelFit};
pub use resistance::{effective_resistance, resistance_between, resistance_summary, Axis, ResistanceSummary};
pub use spectral::{char_poly_coeffs, spectral_summary, top_eigenvalues, SpectralSummary};
pub use tessellation::{triangulation_summary, TriangulationSummary};
