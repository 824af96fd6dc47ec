//! Berk–Nash rationalizability for games with misspecified learners.
//!
//! The crate discretizes actions and parameters on finite grids and provides:
//!
//! - [`model`]: consequence models, payoffs, KL best-fit sets and best responses;
//! - [`solver`]: the rationalizability operators and their largest fixed sets;
//! - [`sim`]: the Bayesian learning dynamic and containment checks;
//! - [`analytic`]: closed-form oracles for the returns-to-effort and team examples;
//! - [`io`]: spec documents, result bundles and the command-line driver.

// Guards such as `!(tol > 0.0)` are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod model;
pub mod solver;
pub mod sim;
pub mod analytic;
pub mod io;
