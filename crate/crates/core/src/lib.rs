//! Statistics and classifiers for telling planar point processes apart from
//! large samples of independent realizations.
//!
//! The pipeline is: simulate labelled realizations ([`simulate`]), reduce
//! each to a fixed vector of summary statistics ([`summarize`], built on
//! [`triangulate`]), and train and evaluate two-class rules ([`classify`]).

pub mod classify;
pub mod error;
pub mod geometry;
pub mod io;
pub mod seed;
pub mod simulate;
pub mod summarize;
pub mod triangulate;

pub use error::{Error, Result};
pub use geometry::{clip, erode_window, nn_distances, Point2, Realization, Window, HARDCORE};
