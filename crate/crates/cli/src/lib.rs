//! Experiment runner behind the `dcsim` binary: sweep configuration,
//! parallel execution and CSV output.

pub mod config;
pub mod report;

use std::path::PathBuf;

use rayon::prelude::*;

use dcsim::{run_scenario, ScenarioOutcome};

use crate::config::SweepSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] dcsim::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for configuration errors, 3 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// Runs every scenario of the sweep on the current rayon pool. Results are
/// returned in grid order whatever the completion order.
pub fn run_sweep(sweep: &SweepSpec) -> Result<Vec<ScenarioOutcome>, CliError> {
    let scenarios = sweep.validate()?;
    let outcomes =
        scenarios.par_iter().map(|config| run_scenario(config, sweep.repetitions)).collect::<Result<Vec<_>, _>>()?;
    Ok(outcomes)
}
