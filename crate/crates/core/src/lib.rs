//! Spatial point pattern analysis built around Bayesian optimal histogram
//! binning: Knuth's maximum-a-posteriori grid search in one and two
//! dimensions, Stone's cross-validation rule, point process simulators,
//! edge-corrected second-order statistics with Monte Carlo envelopes,
//! kernel intensity rasters, and minimum-contrast Thomas process fitting.

pub mod error;
pub mod fitting;
pub mod generators;
pub mod grid;
pub mod kernel;
pub mod knuth;
pub mod pattern;
pub mod rng;
pub mod secondstats;
pub mod stone;

pub use error::{Error, Result};
pub use grid::{BinGrid, Histogram1D, OptimalHistogram};
pub use knuth::{log_posterior, optimal_binning, optimal_binning_1d, KnuthSearchConfig, LogPosteriorSurface};
pub use pattern::{Point, PointPattern, Window};
pub use rng::RandomStream;
pub use secondstats::{CurveEstimate, StatisticKind};
