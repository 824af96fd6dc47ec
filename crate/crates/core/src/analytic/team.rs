use serde::{Deserialize, Serialize};

use crate::model::{
    ActionGrid, ConsequenceModel, CostFn, GameSpec, GaussianLinear, Interaction, ParamGrid, PayoffFn,
    PlayerSpec,
};

use super::{bisect, step_grid_count, AnalyticError};

/// A manager whose effort pays only when two workers act within `threshold`
/// of each other, and two workers whose effort is multiplied by the
/// manager's. All three share true ability and productivity and the same
/// perceived ability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamExample {
    pub true_theta: f64,
    pub true_ability: f64,
    pub ability: f64,
    pub threshold: f64,
    pub cost: CostFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeamLimits {
    pub m_inf: f64,
    pub n_inf: f64,
    pub k_star: f64,
}

impl TeamExample {
    pub fn new(
        true_theta: f64,
        true_ability: f64,
        ability: f64,
        threshold: f64,
        cost: CostFn,
    ) -> Result<Self, AnalyticError> {
        if !(true_theta > 0.0 && true_theta.is_finite()) {
            return Err(AnalyticError::InvalidExample("true theta must be positive".into()));
        }
        if !(true_ability > 0.0 && true_ability.is_finite()) {
            return Err(AnalyticError::InvalidExample("true ability must be positive".into()));
        }
        if !(ability > 0.0 && ability.is_finite()) {
            return Err(AnalyticError::InvalidExample("ability must be positive".into()));
        }
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(AnalyticError::InvalidExample("threshold must be positive".into()));
        }
        cost.validate()?;
        if cost.marginal(0.0) != 0.0 {
            return Err(AnalyticError::InvalidExample("marginal cost must vanish at zero".into()));
        }
        Ok(Self {
            true_theta,
            true_ability,
            ability,
            threshold,
            cost,
        })
    }

    pub fn quadratic(true_theta: f64, true_ability: f64, ability: f64, threshold: f64) -> Result<Self, AnalyticError> {
        Self::new(true_theta, true_ability, ability, threshold, CostFn::quadratic(1.0))
    }

    pub fn correctly_specified(&self) -> bool {
        self.ability == self.true_ability
    }

    /// Best fit for a single profile with regressor `x` (own effort times the
    /// complementary input).
    fn ratio(&self, x: f64) -> f64 {
        self.true_theta * (self.true_ability + x) / (self.ability + x)
    }
}

/// Manager and worker upper limits and the worker-gap bound `k*`.
pub fn team_limits(ex: &TeamExample, tol: f64) -> Result<TeamLimits, AnalyticError> {
    if !(tol > 0.0) {
        return Err(AnalyticError::InvalidExample("tol must be positive".into()));
    }
    let c = &ex.cost;
    let inv = |z: f64| c.inverse_marginal(z);
    if ex.correctly_specified() {
        let m = inv(ex.true_theta);
        let n = inv(ex.true_theta * m);
        return Ok(TeamLimits {
            m_inf: m,
            n_inf: n,
            k_star: 0.0,
        });
    }
    let m1 = inv(ex.true_theta);
    let m = bisect("manager limit", |m| c.marginal(m) - ex.ratio(m), 0.0, m1, tol)?;
    let n1 = inv(ex.true_theta * m);
    let n = bisect("worker limit", |n| c.marginal(n) - m * ex.ratio(m * n), 0.0, n1, tol)?;
    let k_star = n - inv(m * ex.true_theta * ex.true_ability / ex.ability);
    Ok(TeamLimits {
        m_inf: m,
        n_inf: n,
        k_star,
    })
}

/// Widest spread `U(mu) - L(mu)` of worker best responses over beliefs
/// supported in `[0, m] x [0, n]^2` with mean manager effort `mu`.
pub fn team_diff(ex: &TeamExample, m: f64, n: f64, mu: f64) -> f64 {
    let (a, s, t) = (ex.ability, ex.true_ability, ex.true_theta);
    let lower = ex.cost.inverse_marginal(mu * t * s / a);
    let r = (a * s + (a + s) * n * mu + n * n * m * mu) / (a * a + 2.0 * a * n * mu + n * n * m * mu);
    let upper = ex.cost.inverse_marginal(mu * t * r);
    upper - lower
}

/// Unique profile `(M*, N*)` of the correctly specified team.
pub fn team_csi_profile(ex: &TeamExample) -> Result<(f64, f64), AnalyticError> {
    if !ex.correctly_specified() {
        return Err(AnalyticError::NotCorrectlySpecified {
            ability: ex.ability,
            true_ability: ex.true_ability,
        });
    }
    let m = ex.cost.inverse_marginal(ex.true_theta);
    Ok((m, ex.cost.inverse_marginal(ex.true_theta * m)))
}

/// The team as a three-player grid game (manager first) on explicit grids
/// shared by all players.
pub fn team_game_on(ex: &TeamExample, actions: ActionGrid, params: ParamGrid) -> Result<GameSpec, AnalyticError> {
    let model = |interaction| {
        ConsequenceModel::GaussianLinear(GaussianLinear {
            true_theta: ex.true_theta,
            true_ability: ex.true_ability,
            ability: ex.ability,
            interaction,
        })
    };
    let player = |name: &str, interaction| PlayerSpec {
        name: name.into(),
        actions: actions.clone(),
        params: params.clone(),
        model: model(interaction),
        payoff: PayoffFn::OutcomeMinusCost { cost: ex.cost.clone() },
    };
    Ok(GameSpec::new(vec![
        player(
            "manager",
            Interaction::Close {
                first: 1,
                second: 2,
                threshold: ex.threshold,
            },
        ),
        player("worker_a", Interaction::Action { player: 0 }),
        player("worker_b", Interaction::Action { player: 0 }),
    ])?)
}

/// Uniform grids: actions with spacing `action_step` on `[0, action_upper]`,
/// parameters with spacing `theta_step` on `[0, 2 theta*]`.
pub fn team_game(ex: &TeamExample, action_step: f64, action_upper: f64, theta_step: f64) -> Result<GameSpec, AnalyticError> {
    if !(action_step > 0.0 && theta_step > 0.0 && action_upper > 0.0) {
        return Err(AnalyticError::InvalidExample("grid steps and bounds must be positive".into()));
    }
    let na = step_grid_count(action_upper, action_step);
    let nt = step_grid_count(2.0 * ex.true_theta, theta_step);
    let actions = ActionGrid::uniform(0.0, action_step * (na - 1) as f64, na)?;
    let params = ParamGrid::uniform(0.0, theta_step * (nt - 1) as f64, nt)?;
    team_game_on(ex, actions, params)
}
