//! Batch front end: configuration, runs and output files.

pub mod config;
pub mod fields;
pub mod run;

pub use config::{load_config, ConfigError, Mode, Overrides, RunConfig};
pub use run::{execute, run, Status, Summary};
