use serde::{Deserialize, Serialize};

use crate::model::{
    best_response_set, expected_utility, kl_minimizer_set, BeliefChoice, GameSpec, ParamBelief,
    ProfileMixture,
};

use super::SolverError;

/// A witness mixture in compact form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessSigma {
    Point { profile: usize },
    /// `(1 - t) * first + t * second`.
    Pair { first: usize, second: usize, t: f64 },
    General { mixture: ProfileMixture },
}

impl WitnessSigma {
    pub fn from_pairs(pairs: &[(usize, f64)], grid_len: usize) -> Result<Self, SolverError> {
        if pairs.len() == 1 {
            return Ok(WitnessSigma::Point { profile: pairs[0].0 });
        }
        Ok(WitnessSigma::General {
            mixture: ProfileMixture::from_pairs(pairs.iter().copied(), grid_len)?,
        })
    }

    pub fn to_mixture(&self, grid_len: usize) -> Result<ProfileMixture, SolverError> {
        Ok(match self {
            WitnessSigma::Point { profile } => ProfileMixture::point(*profile),
            WitnessSigma::Pair { first, second, t } => {
                ProfileMixture::from_pairs([(*first, 1.0 - t), (*second, *t)], grid_len)?
            }
            WitnessSigma::General { mixture } => mixture.clone(),
        })
    }

    /// True when every support profile lies in `set`.
    pub fn supported_in(&self, set: &super::SurvivorSet) -> bool {
        match self {
            WitnessSigma::Point { profile } => set.contains(*profile),
            WitnessSigma::Pair { first, second, t } => {
                (*t == 1.0 || set.contains(*first)) && (*t == 0.0 || set.contains(*second))
            }
            WitnessSigma::General { mixture } => mixture.support().iter().all(|&p| set.contains(p)),
        }
    }
}

/// Witnesses found by one operator application.
///
/// For the common-witness operator `profiles` maps each surviving profile to
/// an index into `sigmas`; for the player-by-player operators `actions[i][x]`
/// holds the witness for player `i`'s own action `x`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessBook {
    pub sigmas: Vec<WitnessSigma>,
    pub profiles: Vec<(usize, u32)>,
    pub actions: Vec<Vec<Option<u32>>>,
}

impl WitnessBook {
    pub fn witness_for_profile(&self, profile: usize) -> Option<&WitnessSigma> {
        self.profiles
            .binary_search_by_key(&profile, |e| e.0)
            .ok()
            .map(|k| &self.sigmas[self.profiles[k].1 as usize])
    }

    pub fn witness_for_action(&self, player: usize, action: usize) -> Option<&WitnessSigma> {
        self.actions
            .get(player)?
            .get(action)?
            .map(|w| &self.sigmas[w as usize])
    }

    /// Keeps only the entries for profiles in `keep` and drops unused sigmas.
    pub fn restrict(&self, keep: &super::SurvivorSet, grid: &crate::model::ProfileGrid) -> Self {
        let mut used = vec![None; self.sigmas.len()];
        let mut sigmas = Vec::new();
        let mut remap = |w: u32, sigmas: &mut Vec<WitnessSigma>| -> u32 {
            *used[w as usize].get_or_insert_with(|| {
                sigmas.push(self.sigmas[w as usize].clone());
                (sigmas.len() - 1) as u32
            })
        };
        let profiles = self
            .profiles
            .iter()
            .filter(|(p, _)| keep.contains(*p))
            .map(|&(p, w)| (p, remap(w, &mut sigmas)))
            .collect();
        let proj = keep.projections(grid);
        let actions = self
            .actions
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(x, w)| match w {
                        Some(w) if proj[i][x] => Some(remap(*w, &mut sigmas)),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        Self {
            sigmas,
            profiles,
            actions,
        }
    }
}

/// Replayable evidence that a witness justifies an action for one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerCertificate {
    pub player: usize,
    /// Best-fitting parameter indices under the witness.
    pub fit: Vec<usize>,
    pub belief: BeliefChoice,
    pub action: usize,
    /// Subjective utility of the justified action minus the best utility
    /// over the grid (nonpositive, at least `-tol`).
    pub margin: f64,
}

/// Certificate for one witness mixture and the action profile it justifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub sigma: WitnessSigma,
    pub players: Vec<PlayerCertificate>,
}

/// Rebuilds the certificate for `player` choosing `action` under `sigma`
/// using only the public model operations.
pub fn certify_action(
    game: &GameSpec,
    sigma: &WitnessSigma,
    player: usize,
    action: usize,
    tol: f64,
) -> Result<PlayerCertificate, SolverError> {
    let mixture = sigma.to_mixture(game.n_profiles())?;
    let fit = kl_minimizer_set(game, &mixture, player, tol)?;
    let n_params = game.players()[player].params.len();
    let opp = mixture.opponent_marginal(game.grid(), player);
    let mut choices: Vec<BeliefChoice> = fit.iter().map(|&k| BeliefChoice::Point(k)).collect();
    if fit.len() > 1 {
        choices.push(BeliefChoice::Uniform);
    }
    for choice in choices {
        let belief: ParamBelief = choice.to_belief(n_params, &fit);
        let br = best_response_set(game, player, &belief, &opp, tol)?;
        if br.binary_search(&action).is_ok() {
            let own = expected_utility(game, player, action, &belief, &opp)?;
            let best = br
                .iter()
                .map(|&x| expected_utility(game, player, x, &belief, &opp))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            return Ok(PlayerCertificate {
                player,
                fit,
                belief: choice,
                action,
                margin: own - best,
            });
        }
    }
    Err(SolverError::WitnessRejected { player, action })
}

/// Certificate that `sigma` justifies every coordinate of `profile`.
pub fn certify_profile(
    game: &GameSpec,
    sigma: &WitnessSigma,
    profile: usize,
    tol: f64,
) -> Result<Certificate, SolverError> {
    let players = (0..game.n_players())
        .map(|i| certify_action(game, sigma, i, game.grid().coord(profile, i), tol))
        .collect::<Result<_, _>>()?;
    Ok(Certificate {
        sigma: sigma.clone(),
        players,
    })
}

/// Recomputes a certificate and checks it is bitwise identical.
pub fn replay_certificate(game: &GameSpec, cert: &Certificate, tol: f64) -> Result<bool, SolverError> {
    for pc in &cert.players {
        let again = match certify_action(game, &cert.sigma, pc.player, pc.action, tol) {
            Ok(c) => c,
            Err(SolverError::WitnessRejected { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        if again.fit != pc.fit
            || again.belief != pc.belief
            || again.margin.to_bits() != pc.margin.to_bits()
            || again.margin < -tol
        {
            return Ok(false);
        }
    }
    Ok(true)
}
