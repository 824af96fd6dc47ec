//! Spec documents, result bundles, CSV output and the command-line driver.

mod bundle;
mod cli;
mod spec;

pub use bundle::{
    read_trace_actions, rounds_csv, survivors_hash, trace_csv, write_atomic, MixedRecord, ResultBundle,
    SimulationRecord, SolveRecord, TOOL_VERSION,
};
pub use cli::{
    cmd_example, cmd_simulate, cmd_solve, cmd_verify, exit_code, parse_policy, run, Cli, Command, ExampleArgs,
    ExampleName, SimulateArgs, SolveArgs, SolverFlags, VerifyArgs,
};
pub use spec::{GridDoc, MixedDoc, OperatorDoc, PlayerDoc, SimulationDoc, SolverDoc, SpecDocument, SPEC_VERSION};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::model::ModelError;
use crate::sim::SimError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
