//! Experiment driver, file formats and command line front end for the
//! learning-based Helmholtz solver in `lbnm-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
