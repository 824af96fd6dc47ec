//! Rationalizability operators and their fixed points.

mod gamma;
mod iterate;
mod logit;
mod lp;
mod policy;
mod search;
mod survivors;
mod witness;

pub use gamma::{bne_check, gamma_apply, gamma_bp_apply, gamma_weak_apply, phi_apply, Application};
pub use iterate::{iterate_to_fixed, FixedPoint, Operator, RoundRecord};
pub use logit::{
    anneal_cloud, iterate_cloud, logit_probabilities, phi_mixed_step, simplex_cloud, CloudRun,
    LogitPerturbation, MixedProfile, MixedProfileCloud,
};
pub use policy::{simplex_candidate_count, SigmaSearchPolicy, MAX_CANDIDATES};
pub use survivors::SurvivorSet;
pub use witness::{
    certify_action, certify_profile, replay_certificate, Certificate, PlayerCertificate, WitnessBook,
    WitnessSigma,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no profile survives the operator")]
    EmptySurvivorSet,
    #[error("no fixed set after {rounds} rounds")]
    NotConverged { rounds: usize, partial: Box<FixedPoint> },
    #[error("invalid search policy: {0}")]
    InvalidPolicy(String),
    #[error("search policy not applicable: {0}")]
    PolicyNotApplicable(String),
    #[error("search would enumerate {candidates} mixtures")]
    SearchTooLarge { candidates: u128 },
    #[error("the operator needs a product set")]
    NotProductSet,
    #[error("survivor set does not match the game's profile grid")]
    GridMismatch,
    #[error("witness does not justify action {action} of player {player}")]
    WitnessRejected { player: usize, action: usize },
    #[error("best-fitting parameter is not unique (ties within tolerance for player {player})")]
    UnidentifiedModel { player: usize },
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
}
