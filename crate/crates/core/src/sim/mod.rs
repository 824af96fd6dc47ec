//! The learning dynamic: Bayesian posteriors over parameter grids, smoothed
//! empirical forecasts of opponents, myopic best responses, and the
//! finite-horizon containment checks built on them.

mod episode;
mod forecast;
mod posterior;
mod report;

pub use episode::{
    run_episode, run_replications, stream_rng, LearningTrace, RunConfig, Snapshot, ForecastSnapshot,
};
pub use forecast::ForecastState;
pub use posterior::{posterior_update, PosteriorState};
pub use report::{
    containment_report, distance_to_set, limit_points, posterior_decay_test, ContainmentReport,
    DecayTest, TraceContainment,
};

use thiserror::Error;

use crate::model::ModelError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("every likelihood underflowed to zero for player {player}")]
    DegenerateLikelihood { player: usize },
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid forecast state: {0}")]
    InvalidForecast(String),
    #[error("trace too short: {0} periods")]
    TraceTooShort(usize),
}
