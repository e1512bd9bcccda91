//! The named experiments behind each CLI subcommand.

pub mod besov;
pub mod commutator;
pub mod convergence;
pub mod envelope;
pub mod seminorm;
pub mod simulate;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::record::ExperimentOutcome;

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    match cfg.kind {
        ExperimentKind::Simulate => simulate::run(cfg, threads),
        ExperimentKind::Seminorm => seminorm::run(cfg, threads),
        ExperimentKind::Commutator => commutator::run(cfg, threads),
        ExperimentKind::Convergence => convergence::run(cfg, threads),
        ExperimentKind::BesovCheck => besov::run(cfg, threads),
        ExperimentKind::RegularityEnvelope => envelope::run(cfg, threads),
    }
}
