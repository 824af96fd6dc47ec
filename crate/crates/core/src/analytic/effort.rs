use serde::{Deserialize, Serialize};

use crate::model::{
    ActionGrid, ConsequenceModel, CostFn, GameSpec, GaussianLinear, Interaction, ParamGrid, PayoffFn,
    PlayerSpec,
};

use super::{bisect, step_grid_count, AnalyticError, ROOT_TOL};

/// Knot count used when tabulating the smooth figure costs on `[0, 4]`.
const FIGURE_KNOTS: usize = 8001;
const FIGURE_UPPER: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Overconfident,
    Underconfident,
    Correct,
}

/// Single agent choosing effort `a` with outcome
/// `y = theta* (alpha* + a) + noise`, who believes ability is `alpha` and
/// learns `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortExample {
    pub true_theta: f64,
    pub true_ability: f64,
    pub ability: f64,
    pub cost: CostFn,
}

impl EffortExample {
    pub fn new(true_theta: f64, true_ability: f64, ability: f64, cost: CostFn) -> Result<Self, AnalyticError> {
        if !(true_theta > 0.0 && true_theta.is_finite()) {
            return Err(AnalyticError::InvalidExample("true theta must be positive".into()));
        }
        if !(true_ability >= 0.0 && true_ability.is_finite()) {
            return Err(AnalyticError::InvalidExample("true ability must be nonnegative".into()));
        }
        if !(ability > 0.0 && ability.is_finite()) {
            return Err(AnalyticError::InvalidExample("ability must be positive".into()));
        }
        cost.validate()?;
        if cost.marginal(0.0) != 0.0 {
            return Err(AnalyticError::InvalidExample("marginal cost must vanish at zero".into()));
        }
        Ok(Self {
            true_theta,
            true_ability,
            ability,
            cost,
        })
    }

    /// Unit quadratic cost `c(a) = a^2 / 2`.
    pub fn quadratic(true_theta: f64, true_ability: f64, ability: f64) -> Result<Self, AnalyticError> {
        Self::new(true_theta, true_ability, ability, CostFn::quadratic(1.0))
    }

    /// Overconfident instance with three equilibria: a logistic step in
    /// marginal cost near 0.2 followed by a softplus ramp past 1.5.
    pub fn overconfident_figure() -> Result<Self, AnalyticError> {
        let mc = |a: f64| 0.45 / (1.0 + (-25.0 * (a - 0.2)).exp()) + (5.0 * (a - 1.5)).exp().ln_1p() / 5.0;
        Self::new(1.0, 1.0, 3.0, CostFn::tabulate(mc, FIGURE_UPPER, FIGURE_KNOTS)?)
    }

    /// Underconfident instance whose unique equilibrium sits inside a
    /// nontrivial 2-cycle.
    pub fn underconfident_figure() -> Result<Self, AnalyticError> {
        let mc = |a: f64| 1.5 * (1.0 - (-10.0 * a).exp()) + 0.5 * (10.0 * (a - 1.0)).exp().ln_1p();
        Self::new(1.0, 1.0, 0.5, CostFn::tabulate(mc, FIGURE_UPPER, FIGURE_KNOTS)?)
    }

    pub fn regime(&self) -> Regime {
        if self.ability > self.true_ability {
            Regime::Overconfident
        } else if self.ability < self.true_ability {
            Regime::Underconfident
        } else {
            Regime::Correct
        }
    }

    /// Best-fit parameter when effort is held at `a`.
    pub fn theta_m(&self, a: f64) -> f64 {
        let t = self.true_theta;
        t + t * (self.true_ability - self.ability) / (self.ability + a)
    }

    /// Best response to the best fit at `a`.
    pub fn t_map(&self, a: f64) -> f64 {
        self.cost.inverse_marginal(self.theta_m(a))
    }

    /// Upper end of the parameter grid: `2 theta*`, raised if needed so that
    /// every best fit lies inside.
    pub fn theta_cap(&self) -> f64 {
        (2.0 * self.true_theta).max(self.theta_m(0.0))
    }

    /// Upper action bound `(c')^{-1}(theta_cap)`; no best response exceeds it.
    pub fn action_cap(&self) -> f64 {
        self.cost.inverse_marginal(self.theta_cap())
    }
}

pub fn effort_theta_m(ex: &EffortExample, a: f64) -> f64 {
    ex.theta_m(a)
}

#[allow(non_snake_case)]
pub fn effort_T(ex: &EffortExample, a: f64) -> f64 {
    ex.t_map(a)
}

/// Limits of the interval iteration started from `[0, action_cap]`. The
/// overconfident (and correct) case iterates each end through `T`; the
/// underconfident case crosses them. Stops once the returned pair satisfies
/// its fixed-point or 2-cycle equations to within `tol`.
pub fn effort_rationalizable_interval(
    ex: &EffortExample,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64), AnalyticError> {
    if !(tol > 0.0) {
        return Err(AnalyticError::InvalidExample("tol must be positive".into()));
    }
    let crossed = ex.regime() == Regime::Underconfident;
    let (mut lo, mut hi) = (0.0, ex.action_cap());
    for _ in 0..max_iter {
        let (tl, th) = (ex.t_map(lo), ex.t_map(hi));
        let (nlo, nhi) = if crossed { (th, tl) } else { (tl, th) };
        if (nlo - lo).abs() < tol && (nhi - hi).abs() < tol {
            return Ok((lo, hi));
        }
        lo = nlo;
        hi = nhi;
    }
    Err(AnalyticError::NotConverged {
        what: "interval iteration",
        iterations: max_iter,
    })
}

/// Fixed points of `T` on `[0, action_cap]`, found by scanning `scan`
/// subintervals for sign changes of `T(a) - a` and bisecting each.
pub fn effort_equilibria(ex: &EffortExample, scan: usize) -> Result<Vec<f64>, AnalyticError> {
    let h = |a: f64| ex.t_map(a) - a;
    let top = ex.action_cap();
    let scan = scan.max(1);
    let mut out: Vec<f64> = Vec::new();
    let mut prev = (0.0, h(0.0));
    if prev.1 == 0.0 {
        out.push(0.0);
    }
    for k in 1..=scan {
        let a = top * k as f64 / scan as f64;
        let cur = (a, h(a));
        if cur.1 == 0.0 {
            out.push(a);
        } else if prev.1 != 0.0 && prev.1.signum() != cur.1.signum() {
            out.push(bisect("T(a) - a", h, prev.0, cur.0, ROOT_TOL)?);
        }
        prev = cur;
    }
    Ok(out)
}

/// Fixed points of `T∘T` that are not fixed points of `T`, as
/// `(low, high)` pairs with `T(low) = high`.
pub fn effort_two_cycles(ex: &EffortExample, scan: usize) -> Result<Vec<(f64, f64)>, AnalyticError> {
    let h = |a: f64| ex.t_map(ex.t_map(a)) - a;
    let top = ex.action_cap();
    let scan = scan.max(1);
    let mut roots = Vec::new();
    let mut prev = (0.0, h(0.0));
    for k in 1..=scan {
        let a = top * k as f64 / scan as f64;
        let cur = (a, h(a));
        if prev.1 != 0.0 && cur.1 != 0.0 && prev.1.signum() != cur.1.signum() {
            roots.push(bisect("T(T(a)) - a", h, prev.0, cur.0, ROOT_TOL)?);
        }
        prev = cur;
    }
    let mut pairs = Vec::new();
    for &r in &roots {
        let image = ex.t_map(r);
        if (image - r).abs() > 1e-9 && r < image {
            pairs.push((r, image));
        }
    }
    Ok(pairs)
}

/// The example as a one-player grid game on explicit grids.
pub fn effort_game_on(ex: &EffortExample, actions: ActionGrid, params: ParamGrid) -> Result<GameSpec, AnalyticError> {
    let player = PlayerSpec {
        name: "agent".into(),
        actions,
        params,
        model: ConsequenceModel::GaussianLinear(GaussianLinear {
            true_theta: ex.true_theta,
            true_ability: ex.true_ability,
            ability: ex.ability,
            interaction: Interaction::Unit,
        }),
        payoff: PayoffFn::OutcomeMinusCost { cost: ex.cost.clone() },
    };
    Ok(GameSpec::new(vec![player])?)
}

/// The example on uniform grids of spacing `step` over `[0, action_cap]`
/// (actions) and `[0, theta_cap]` (parameters), each rounded up to a whole
/// number of steps.
pub fn effort_game(ex: &EffortExample, step: f64) -> Result<GameSpec, AnalyticError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(AnalyticError::InvalidExample("grid step must be positive".into()));
    }
    let na = step_grid_count(ex.action_cap(), step);
    let nt = step_grid_count(ex.theta_cap(), step);
    let actions = ActionGrid::uniform(0.0, step * (na - 1) as f64, na)?;
    let params = ParamGrid::uniform(0.0, step * (nt - 1) as f64, nt)?;
    effort_game_on(ex, actions, params)
}
