//! Experiment harness for the scheme laboratory: configuration, the named
//! experiments, run records, and result emission.

pub mod calibration;
pub mod config;
pub mod emit;
pub mod error;
pub mod experiments;
pub mod record;
pub mod util;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use record::{ExperimentOutcome, RunRecord, Table};
