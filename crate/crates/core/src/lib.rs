//! Clustering of jointly sampled time series into mutually independent groups.
//!
//! The crate covers three settings:
//!
//! * a known finite joint distribution, queried exactly ([`finite_dist`],
//!   [`clustering::clin`] with an [`clustering::ExactOracle`]);
//! * i.i.d. samples, where comparisons are thresholded estimates and
//!   positivity is decided by a circular-shift surrogate test;
//! * stationary ergodic samples with a known number of clusters, driven by the
//!   empirical sum-information ([`clustering::clink`]).

pub mod clustering;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod finite_dist;
pub mod io;
pub mod model;
pub mod quantizer;

pub use error::{Error, Result};
pub use model::{Partition, RunConfig, SeriesSet};
