//! Experiment runner over the `infogeo` library: configuration, reports and
//! the pipelines behind each subcommand.

pub mod config;
pub mod report;
pub mod runs;

pub use config::{ConfigError, ExperimentConfig, ModelSelection};
pub use report::{Check, RunReport};
pub use runs::{RunError, RunOutput};
