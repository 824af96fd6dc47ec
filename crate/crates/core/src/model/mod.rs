//! Game primitives: grids, consequence models, payoffs, and the two basic
//! computations every operator is built from (best-fitting parameters and
//! best responses).

mod consequence;
mod game;
mod grid;
mod mixture;
mod ops;
mod payoff;

pub use consequence::{ConsequenceModel, GaussianLinear, Interaction, TabularFinite};
pub use game::{GameSpec, PlayerSpec};
pub use grid::{ActionGrid, ParamGrid, ProfileGrid};
pub use mixture::{OpponentMarginal, ParamBelief, ProfileMixture};
pub use ops::{
    best_response_set, expected_kl, expected_utility, kl_minimizer_set, kl_point,
    log_likelihood, DEFAULT_TOL,
};
pub use payoff::{CostFn, PayoffFn};

pub use ops::BeliefChoice;
pub(crate) use ops::{gauss_justify, max_band, GaussPlayer, Moments, PlayerEval};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{0} is empty")]
    EmptyGrid(&'static str),
    #[error("{0} contains a non-finite point")]
    NonFiniteGrid(&'static str),
    #[error("{0} is not strictly increasing")]
    NotIncreasing(&'static str),
    #[error("parameter grid points fall outside the declared bounds")]
    ParamOutOfBounds,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("profile index {index} out of range (grid has {len} profiles)")]
    SupportOutOfRange { index: usize, len: usize },
    #[error("profile index {0} appears twice in a mixture support")]
    DuplicateSupport(usize),
    #[error("KL divergence is infinite for player {player}, parameter {theta}, profile {profile}")]
    NonFiniteKL {
        player: usize,
        theta: usize,
        profile: usize,
    },
    #[error("player {player}: {reason}")]
    InvalidModel { player: usize, reason: String },
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("unknown player {0}")]
    UnknownPlayer(usize),
    #[error("game has no players")]
    NoPlayers,
}
