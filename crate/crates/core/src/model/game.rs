use serde::{Deserialize, Serialize};

use super::consequence::ConsequenceModel;
use super::grid::{ActionGrid, ParamGrid, ProfileGrid};
use super::payoff::PayoffFn;
use super::ModelError;

const ROW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub name: String,
    pub actions: ActionGrid,
    pub params: ParamGrid,
    pub model: ConsequenceModel,
    pub payoff: PayoffFn,
}

/// A complete-information game with misspecified learners, discretized on
/// finite grids.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    players: Vec<PlayerSpec>,
    grid: ProfileGrid,
}

impl GameSpec {
    pub fn new(players: Vec<PlayerSpec>) -> Result<Self, ModelError> {
        if players.is_empty() {
            return Err(ModelError::NoPlayers);
        }
        let grid = ProfileGrid::new(players.iter().map(|p| p.actions.len()).collect());
        let game = Self { players, grid };
        for i in 0..game.players.len() {
            game.validate_player(i)?;
        }
        Ok(game)
    }

    fn validate_player(&self, i: usize) -> Result<(), ModelError> {
        let p = &self.players[i];
        let fail = |reason: String| Err(ModelError::InvalidModel { player: i, reason });
        if let Some(cost) = p.payoff.cost() {
            cost.validate()?;
            if p.actions.min() < cost.domain_min() {
                return fail("action grid extends below the cost's domain".into());
            }
        }
        match &p.model {
            ConsequenceModel::GaussianLinear(m) => {
                if !matches!(p.payoff, PayoffFn::OutcomeMinusCost { .. }) {
                    return fail("Gaussian outcomes need an outcome-minus-cost payoff".into());
                }
                let coefs = [m.true_theta, m.true_ability, m.ability];
                if coefs.iter().any(|c| !c.is_finite()) {
                    return fail("non-finite model coefficient".into());
                }
                for q in m.interaction.players() {
                    if q == i || q >= self.players.len() {
                        return fail(format!("interaction refers to invalid player {q}"));
                    }
                }
                if let super::Interaction::Close { threshold, .. } = m.interaction {
                    if !(threshold > 0.0) {
                        return fail("closeness threshold must be positive".into());
                    }
                }
            }
            ConsequenceModel::TabularFinite(t) => {
                let n_out = t.outcomes.len();
                if n_out == 0 || t.outcomes.iter().any(|o| !o.is_finite()) {
                    return fail("outcome list must be nonempty and finite".into());
                }
                for (k, o) in t.outcomes.iter().enumerate() {
                    if t.outcomes[..k].contains(o) {
                        return fail("outcome values must be distinct".into());
                    }
                }
                if t.truth.len() != self.grid.len() {
                    return fail(format!(
                        "true kernel has {} rows, grid has {} profiles",
                        t.truth.len(),
                        self.grid.len()
                    ));
                }
                if t.family.len() != p.params.len() {
                    return fail("model family needs one layer per parameter point".into());
                }
                let check_row = |row: &Vec<f64>| -> bool {
                    row.len() == n_out
                        && row.iter().all(|q| q.is_finite() && *q >= 0.0)
                        && (row.iter().sum::<f64>() - 1.0).abs() <= ROW_TOL
                };
                if !t.truth.iter().all(check_row) {
                    return fail("true kernel rows must be probability vectors".into());
                }
                for (theta, layer) in t.family.iter().enumerate() {
                    if layer.len() != self.grid.len() || !layer.iter().all(check_row) {
                        return fail(format!("model rows for parameter {theta} are invalid"));
                    }
                    for (profile, (row, truth)) in layer.iter().zip(&t.truth).enumerate() {
                        if row.iter().zip(truth).any(|(q, q0)| *q0 > 0.0 && *q <= 0.0) {
                            return fail(format!(
                                "parameter {theta} gives zero probability to a possible outcome at profile {profile}"
                            ));
                        }
                    }
                }
                if let PayoffFn::Table { values } = &p.payoff {
                    if values.len() != p.actions.len() || values.iter().any(|r| r.len() != n_out) {
                        return fail("payoff table must be actions x outcomes".into());
                    }
                    if values.iter().flatten().any(|v| !v.is_finite()) {
                        return fail("payoff table has a non-finite entry".into());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn players(&self) -> &[PlayerSpec] {
        &self.players
    }

    pub fn player(&self, i: usize) -> Result<&PlayerSpec, ModelError> {
        self.players.get(i).ok_or(ModelError::UnknownPlayer(i))
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn grid(&self) -> &ProfileGrid {
        &self.grid
    }

    pub fn n_profiles(&self) -> usize {
        self.grid.len()
    }

    /// Action value of `player` at `profile`.
    #[inline]
    pub fn action_value(&self, profile: usize, player: usize) -> f64 {
        self.players[player].actions.value(self.grid.coord(profile, player))
    }

    pub fn action_values(&self, profile: usize) -> Vec<f64> {
        (0..self.players.len())
            .map(|i| self.action_value(profile, i))
            .collect()
    }

    /// Profile whose coordinates are the grid points nearest to `values`.
    pub fn nearest_profile(&self, values: &[f64]) -> usize {
        let coords: Vec<usize> = values
            .iter()
            .zip(&self.players)
            .map(|(v, p)| p.actions.nearest(*v))
            .collect();
        self.grid.encode(&coords)
    }

    /// True when every player's model is Gaussian.
    pub fn is_gaussian(&self) -> bool {
        self.players
            .iter()
            .all(|p| matches!(p.model, ConsequenceModel::GaussianLinear(_)))
    }
}
