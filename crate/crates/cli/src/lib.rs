//! Batch front-end: configuration, run modes and result files.

pub mod config;
pub mod error;
pub mod modes;
pub mod output;

pub use config::{load_config, RunConfig};
pub use error::CliError;
pub use modes::run;
