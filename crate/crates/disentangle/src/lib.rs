//! Command-line experiments on top of `disentangle-core`: configuration,
//! parallel sweeps, CSV/JSON output and the invariant suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;
pub mod verify;

pub use config::{ConfigError, RunConfig};
pub use error::AppError;
