//! Experiment runner for the lielength toolkit: configuration, dispatch,
//! report emission, brute-force oracles and the acceptance battery.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod oracles;
pub mod report;

pub use commands::run;
pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use error::{CliError, CliResult};
pub use report::{Check, Report, Table};
