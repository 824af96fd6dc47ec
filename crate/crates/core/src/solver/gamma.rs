use crate::model::{GameSpec, ProfileMixture};

use super::lp::run_lp;
use super::search::{run_enumeration, Ctx, Mode};
use super::survivors::SurvivorSet;
use super::witness::WitnessBook;
use super::{SigmaSearchPolicy, SolverError};

/// Output of one operator application: the (raw) image and the witnesses
/// that certify it.
#[derive(Debug, Clone, PartialEq)]
pub struct Application {
    pub survivors: SurvivorSet,
    pub witnesses: WitnessBook,
}

fn apply(
    game: &GameSpec,
    a: &SurvivorSet,
    policy: &SigmaSearchPolicy,
    tol: f64,
    mode: Mode,
) -> Result<Application, SolverError> {
    policy.validate()?;
    if a.grid_len() != game.n_profiles() {
        return Err(SolverError::GridMismatch);
    }
    if a.is_empty() {
        return Err(SolverError::EmptySurvivorSet);
    }
    let ctx = Ctx::new(game, tol, mode)?;
    let (survivors, witnesses) = match policy {
        SigmaSearchPolicy::LinearProgram => run_lp(&ctx, a)?,
        _ => run_enumeration(&ctx, a, policy)?,
    };
    if survivors.is_empty() {
        return Err(SolverError::EmptySurvivorSet);
    }
    Ok(Application {
        survivors: survivors.with_round(a.round() + 1),
        witnesses,
    })
}

/// Profiles justified by a single searched mixture over `a`: every player's
/// coordinate is a best response to some belief over the parameters that
/// best fit that mixture, against its opponent marginal.
///
/// Survival is certified by a stored witness; elimination is only as
/// complete as the search policy.
pub fn gamma_apply(
    game: &GameSpec,
    a: &SurvivorSet,
    policy: &SigmaSearchPolicy,
    tol: f64,
) -> Result<Application, SolverError> {
    apply(game, a, policy, tol, Mode::Common)
}

/// Like [`gamma_apply`] but each player may use their own witness mixture;
/// the image is the product of per-player justified actions.
pub fn gamma_weak_apply(
    game: &GameSpec,
    a: &SurvivorSet,
    policy: &SigmaSearchPolicy,
    tol: f64,
) -> Result<Application, SolverError> {
    apply(game, a, policy, tol, Mode::PerPlayer)
}

/// Player-by-player conjectures on a product set. Under misspecification the
/// beliefs are fit to a player-specific mixture extending the conjecture, so
/// this coincides with [`gamma_weak_apply`] on product sets.
pub fn gamma_bp_apply(
    game: &GameSpec,
    a: &SurvivorSet,
    policy: &SigmaSearchPolicy,
    tol: f64,
) -> Result<Application, SolverError> {
    if !a.is_product(game.grid()) {
        return Err(SolverError::NotProductSet);
    }
    apply(game, a, policy, tol, Mode::PerPlayer)
}

/// Whether `profile` is an equilibrium: it survives with the witness forced
/// to the point mass on itself.
pub fn bne_check(game: &GameSpec, profile: usize, tol: f64) -> Result<bool, SolverError> {
    if profile >= game.n_profiles() {
        return Err(SolverError::GridMismatch);
    }
    let ctx = Ctx::new(game, tol, Mode::Common)?;
    for (i, e) in ctx.evals.iter().enumerate() {
        let j = e.justify(&[(profile, 1.0)], tol)?;
        if j.justifies(game.grid().coord(profile, i)).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every support profile of `candidate` is justified by some
/// searched mixture over `b`.
pub fn phi_apply(
    game: &GameSpec,
    candidate: &ProfileMixture,
    b: &SurvivorSet,
    policy: &SigmaSearchPolicy,
    tol: f64,
) -> Result<bool, SolverError> {
    if candidate.support().iter().any(|&p| p >= game.n_profiles()) {
        return Err(SolverError::GridMismatch);
    }
    let image = match gamma_apply(game, b, policy, tol) {
        Ok(app) => app.survivors,
        Err(SolverError::EmptySurvivorSet) => return Ok(false),
        Err(e) => return Err(e),
    };
    Ok(candidate.support().iter().all(|&p| image.contains(p)))
}
