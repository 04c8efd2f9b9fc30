//! Command-line front-end: TOML configs in, JSON reports and orbit CSVs out.

pub mod config;
pub mod run;

pub use config::{AnalysisConfig, Setup};
pub use run::{CliError, Report};
