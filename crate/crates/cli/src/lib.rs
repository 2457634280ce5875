//! Batch front end for `pointbin`: census CSV input, flat TOML run
//! configuration, per-species analysis with error isolation, and CSV plus
//! JSON-manifest output.

pub mod census;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod study;

pub use census::{read_census_csv, CensusTable};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{run_pipeline, RunReport};
