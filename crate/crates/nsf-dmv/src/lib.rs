//! File formats, experiment configuration, scenario orchestration and report rendering
//! on top of `nsf-dmv-core`.

pub mod config;
pub mod formats;
pub mod harness;
pub mod report;

use std::path::{Path, PathBuf};

use nsf_dmv_core::dmv::DmvError;
use nsf_dmv_core::relenergy::RelEnergyError;
use nsf_dmv_core::solver::SolverError;

pub use config::ExperimentConfig;
pub use harness::{run_experiment, SuiteReport};

/// Exit code for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code when a mandatory check fails or a pipeline stage cannot complete.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for invalid usage, configuration or input files.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Dmv(#[from] DmvError),
    #[error(transparent)]
    RelEnergy(#[from] RelEnergyError),
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("format: {0}")]
    Format(String),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: CoreError },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// Wraps a core error with the pipeline stage it came from.
    pub fn stage<E: Into<CoreError>>(stage: &'static str) -> impl FnOnce(E) -> Error {
        move |e| Error::Stage { stage, source: e.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { .. } => EXIT_FAIL,
            _ => EXIT_USAGE,
        }
    }
}
