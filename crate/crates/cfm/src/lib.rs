//! Configuration-driven experiment runner for `cfm-core`.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigError, Experiment, ExperimentConfig, Mode};
pub use run::{execute, write_files, Outcome, RunError};
