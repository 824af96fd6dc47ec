use super::consequence::{ConsequenceModel, GaussianLinear, TabularFinite};
use super::game::GameSpec;
use super::mixture::{OpponentMarginal, ParamBelief, ProfileMixture};
use super::payoff::{CostFn, PayoffFn};
use super::ModelError;

/// Width of the argmin/argmax bands used throughout.
pub const DEFAULT_TOL: f64 = 1e-9;

/// KL divergence `K^i(theta, a)` of parameter index `theta` at `profile`.
pub fn kl_point(game: &GameSpec, player: usize, theta: usize, profile: usize) -> Result<f64, ModelError> {
    let spec = game.player(player)?;
    match &spec.model {
        ConsequenceModel::GaussianLinear(m) => {
            let own = game.action_value(profile, player);
            let g = m.interaction.eval(&game.action_values(profile));
            Ok(m.kl(spec.params.value(theta), own, g))
        }
        ConsequenceModel::TabularFinite(t) => t.kl(theta, profile).ok_or(ModelError::NonFiniteKL {
            player,
            theta,
            profile,
        }),
    }
}

/// Expected KL divergence of parameter index `theta` under `sigma`.
pub fn expected_kl(
    game: &GameSpec,
    player: usize,
    theta: usize,
    sigma: &ProfileMixture,
) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for (p, w) in sigma.iter() {
        total += w * kl_point(game, player, theta, p)?;
    }
    Ok(total)
}

/// Parameter indices whose expected KL under `sigma` is within `tol` of the
/// grid minimum. Never empty.
pub fn kl_minimizer_set(
    game: &GameSpec,
    sigma: &ProfileMixture,
    player: usize,
    tol: f64,
) -> Result<Vec<usize>, ModelError> {
    let eval = PlayerEval::new(game, player)?;
    eval.fit(&sigma_pairs(sigma), tol)
}

/// Subjective expected utility of own action index `action` under `belief`
/// and the opponents' marginal.
pub fn expected_utility(
    game: &GameSpec,
    player: usize,
    action: usize,
    belief: &ParamBelief,
    opp: &OpponentMarginal,
) -> Result<f64, ModelError> {
    let spec = game.player(player)?;
    let grid = game.grid();
    let x = spec.actions.value(action);
    let thetas = spec.params.points();
    match (&spec.model, &spec.payoff) {
        (ConsequenceModel::GaussianLinear(m), PayoffFn::OutcomeMinusCost { cost }) => {
            let eg: f64 = opp
                .iter()
                .map(|(c, w)| w * m.interaction.eval(&game.action_values(grid.join(player, action, c))))
                .sum();
            let theta_bar = belief.mean(thetas);
            Ok(theta_bar * (m.ability + x * eg) - cost.cost(x))
        }
        (ConsequenceModel::TabularFinite(t), payoff) => {
            let mut total = 0.0;
            for (k, &mu) in belief.weights().iter().enumerate() {
                if mu == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for (c, w) in opp.iter() {
                    let p = grid.join(player, action, c);
                    inner += w * tab_utility(t, payoff, k, p, action, x);
                }
                total += mu * inner;
            }
            Ok(total)
        }
        _ => Err(ModelError::InvalidModel {
            player,
            reason: "unsupported model/payoff pairing".into(),
        }),
    }
}

/// All own action indices within `tol` of the best subjective expected
/// utility, ascending. Never empty.
pub fn best_response_set(
    game: &GameSpec,
    player: usize,
    belief: &ParamBelief,
    opp: &OpponentMarginal,
    tol: f64,
) -> Result<Vec<usize>, ModelError> {
    let spec = game.player(player)?;
    opp.validate(game.grid().opp_len(player))?;
    if belief.len() != spec.params.len() {
        return Err(ModelError::InvalidWeights(
            "belief length differs from the parameter grid".into(),
        ));
    }
    match PlayerEval::new(game, player)? {
        PlayerEval::Gauss(gp) => {
            let grid = game.grid();
            let eg: f64 = opp.iter().map(|(c, w)| w * gp.g(grid.join(player, 0, c))).sum();
            Ok(gp.best_response(belief.mean(spec.params.points()) * eg, tol))
        }
        PlayerEval::Tab(_) => {
            let utils: Vec<f64> = (0..spec.actions.len())
                .map(|x| expected_utility(game, player, x, belief, opp))
                .collect::<Result<_, _>>()?;
            Ok(max_band(&utils, tol))
        }
    }
}

/// Log density of outcome `y` at `profile` under parameter index `theta`.
pub fn log_likelihood(game: &GameSpec, player: usize, theta: usize, profile: usize, y: f64) -> Result<f64, ModelError> {
    let spec = game.player(player)?;
    Ok(match &spec.model {
        ConsequenceModel::GaussianLinear(m) => {
            let own = game.action_value(profile, player);
            let g = m.interaction.eval(&game.action_values(profile));
            m.log_density(spec.params.value(theta), own, g, y)
        }
        ConsequenceModel::TabularFinite(t) => match t.outcome_index(y) {
            Some(k) => t.family[theta][profile][k].ln(),
            None => f64::NEG_INFINITY,
        },
    })
}

fn tab_utility(t: &TabularFinite, payoff: &PayoffFn, theta: usize, profile: usize, action: usize, x: f64) -> f64 {
    t.family[theta][profile]
        .iter()
        .zip(&t.outcomes)
        .enumerate()
        .map(|(k, (q, y))| q * payoff.eval(action, x, k, *y))
        .sum()
}

fn sigma_pairs(sigma: &ProfileMixture) -> Vec<(usize, f64)> {
    sigma.iter().collect()
}

/// Indices within `tol` of the maximum.
pub(crate) fn max_band(values: &[f64], tol: f64) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&k| values[k] >= best - tol).collect()
}

/// Indices within `tol` of the minimum.
pub(crate) fn min_band(values: &[f64], tol: f64) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    (0..values.len()).filter(|&k| values[k] <= best + tol).collect()
}

/// Sufficient statistics of a linear-Gaussian player's fit under a mixture:
/// weighted sums of `r^2`, `r m*`, `m*^2` and `g`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub srr: f64,
    pub srm: f64,
    pub smm: f64,
    pub eg: f64,
}

impl Moments {
    #[inline]
    pub fn lerp(&self, other: &Moments, t: f64) -> Moments {
        let s = 1.0 - t;
        Moments {
            srr: s * self.srr + t * other.srr,
            srm: s * self.srm + t * other.srm,
            smm: s * self.smm + t * other.smm,
            eg: s * self.eg + t * other.eg,
        }
    }

    #[inline]
    pub fn add_scaled(&mut self, other: &Moments, w: f64) {
        self.srr += w * other.srr;
        self.srm += w * other.srm;
        self.smm += w * other.smm;
        self.eg += w * other.eg;
    }

    /// Unconstrained least-squares parameter, if the regressor is not
    /// identically zero.
    #[inline]
    pub fn theta_hat(&self) -> Option<f64> {
        (self.srr > 0.0).then(|| self.srm / self.srr)
    }
}

/// Fast evaluator for a linear-Gaussian player with outcome-minus-cost payoff.
#[derive(Debug, Clone)]
pub(crate) struct GaussPlayer<'a> {
    game: &'a GameSpec,
    pub player: usize,
    pub model: &'a GaussianLinear,
    pub cost: &'a CostFn,
    pub thetas: &'a [f64],
    pub actions: &'a [f64],
}

impl<'a> GaussPlayer<'a> {
    #[inline]
    pub fn g(&self, profile: usize) -> f64 {
        use super::Interaction::*;
        let game = self.game;
        match self.model.interaction {
            Unit => 1.0,
            Action { player } => game.action_value(profile, player),
            Close {
                first,
                second,
                threshold,
            } => {
                let d = game.action_value(profile, first) - game.action_value(profile, second);
                if d.abs() < threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn own(&self, profile: usize) -> f64 {
        self.game.action_value(profile, self.player)
    }

    #[inline]
    pub fn point_moments(&self, profile: usize) -> Moments {
        let own = self.own(profile);
        let g = self.g(profile);
        let r = self.model.regressor(own, g);
        let m = self.model.true_mean(own, g);
        Moments {
            srr: r * r,
            srm: r * m,
            smm: m * m,
            eg: g,
        }
    }

    pub fn moments(&self, sigma: &[(usize, f64)]) -> Moments {
        let mut acc = Moments::default();
        for &(p, w) in sigma {
            acc.add_scaled(&self.point_moments(p), w);
        }
        acc
    }

    /// Parameter indices within `tol` of the minimal expected KL.
    pub fn fit_moments(&self, m: &Moments, tol: f64) -> Vec<usize> {
        let n = self.thetas.len();
        let Some(hat) = m.theta_hat() else {
            return (0..n).collect();
        };
        let k = super::grid::nearest_index(self.thetas, hat);
        // Expected KL is 0.5 * srr * (theta - hat)^2 plus a constant.
        let gap = |j: usize| 0.5 * m.srr * ((self.thetas[j] - hat).powi(2));
        let best = gap(k);
        let mut lo = k;
        while lo > 0 && gap(lo - 1) - best <= tol {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < n && gap(hi + 1) - best <= tol {
            hi += 1;
        }
        (lo..=hi).collect()
    }

    #[inline]
    fn objective(&self, x: f64, z: f64) -> f64 {
        x * z - self.cost.cost(x)
    }

    /// Grid maximizers of `x z - c(x)`: the best responses when the
    /// perceived marginal return of effort is `z`.
    pub fn best_response(&self, z: f64, tol: f64) -> Vec<usize> {
        let n = self.actions.len();
        let target = self.cost.inverse_marginal(z);
        let mut k = super::grid::nearest_index(self.actions, target);
        // The objective is concave, so the grid maximum sits next to `target`.
        let mut best = self.objective(self.actions[k], z);
        for j in [k.saturating_sub(1), (k + 1).min(n - 1)] {
            let v = self.objective(self.actions[j], z);
            if v > best {
                best = v;
                k = j;
            }
        }
        let mut lo = k;
        while lo > 0 && self.objective(self.actions[lo - 1], z) >= best - tol {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < n && self.objective(self.actions[hi + 1], z) >= best - tol {
            hi += 1;
        }
        (lo..=hi).collect()
    }
}

/// Fast evaluator for a finite-outcome player: cached KL and subjective
/// utility per (parameter, profile).
#[derive(Debug, Clone)]
pub(crate) struct TabPlayer<'a> {
    game: &'a GameSpec,
    pub player: usize,
    n_profiles: usize,
    n_actions: usize,
    kl: Vec<f64>,
    util: Vec<f64>,
}

impl<'a> TabPlayer<'a> {
    fn new(game: &'a GameSpec, player: usize, t: &TabularFinite, payoff: &PayoffFn) -> Self {
        let spec = &game.players()[player];
        let n = game.n_profiles();
        let n_theta = spec.params.len();
        let mut kl = Vec::with_capacity(n_theta * n);
        let mut util = Vec::with_capacity(n_theta * n);
        for theta in 0..n_theta {
            for p in 0..n {
                kl.push(t.kl(theta, p).unwrap_or(f64::INFINITY));
                let a = game.grid().coord(p, player);
                util.push(tab_utility(t, payoff, theta, p, a, spec.actions.value(a)));
            }
        }
        Self {
            game,
            player,
            n_profiles: n,
            n_actions: spec.actions.len(),
            kl,
            util,
        }
    }

    pub fn n_thetas(&self) -> usize {
        self.kl.len() / self.n_profiles
    }

    #[inline]
    pub fn kl_at(&self, theta: usize, profile: usize) -> f64 {
        self.kl[theta * self.n_profiles + profile]
    }

    #[inline]
    pub fn util_at(&self, theta: usize, profile: usize) -> f64 {
        self.util[theta * self.n_profiles + profile]
    }

    pub fn expected_kls(&self, sigma: &[(usize, f64)]) -> Result<Vec<f64>, ModelError> {
        (0..self.n_thetas())
            .map(|theta| {
                let mut total = 0.0;
                for &(p, w) in sigma {
                    let k = self.kl_at(theta, p);
                    if !k.is_finite() {
                        return Err(ModelError::NonFiniteKL {
                            player: self.player,
                            theta,
                            profile: p,
                        });
                    }
                    total += w * k;
                }
                Ok(total)
            })
            .collect()
    }

    /// `values[theta][x]`: subjective utility of own action `x` against the
    /// opponents' pushforward of `sigma` under parameter `theta`.
    pub fn action_values(&self, sigma: &[(usize, f64)], thetas: &[usize]) -> Vec<Vec<f64>> {
        let grid = self.game.grid();
        thetas
            .iter()
            .map(|&theta| {
                let mut out = vec![0.0; self.n_actions];
                for &(p, w) in sigma {
                    for (x, slot) in out.iter_mut().enumerate() {
                        *slot += w * self.util_at(theta, grid.with_coord(p, self.player, x));
                    }
                }
                out
            })
            .collect()
    }

    /// Subjective utilities of every own action against an explicit
    /// distribution over opponent cells.
    pub fn utilities_against(&self, belief: &[f64], opp: &[(usize, f64)]) -> Vec<f64> {
        let grid = self.game.grid();
        let mut out = vec![0.0; self.n_actions];
        for (theta, &mu) in belief.iter().enumerate() {
            if mu == 0.0 {
                continue;
            }
            for &(c, w) in opp {
                for (x, slot) in out.iter_mut().enumerate() {
                    *slot += mu * w * self.util_at(theta, grid.join(self.player, x, c));
                }
            }
        }
        out
    }
}

/// Which belief over the best-fitting set justified an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefChoice {
    /// Point mass on one best-fitting parameter index.
    Point(usize),
    /// Uniform over the whole best-fitting set.
    Uniform,
}

impl BeliefChoice {
    pub fn to_belief(self, len: usize, fit: &[usize]) -> ParamBelief {
        match self {
            BeliefChoice::Point(k) => ParamBelief::point(len, k),
            BeliefChoice::Uniform => ParamBelief::uniform_over(len, fit),
        }
    }
}

/// One belief option and its best responses.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BeliefOption {
    pub choice: BeliefChoice,
    pub actions: Vec<usize>,
}

/// Everything a mixture justifies for one player.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Justification {
    pub fit: Vec<usize>,
    pub options: Vec<BeliefOption>,
}

impl Justification {
    /// Sorted union of best responses over all belief options.
    pub fn actions(&self) -> Vec<usize> {
        if self.options.len() == 1 {
            return self.options[0].actions.clone();
        }
        let mut all: Vec<usize> = self.options.iter().flat_map(|o| o.actions.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn justifies(&self, action: usize) -> Option<BeliefChoice> {
        self.options
            .iter()
            .find(|o| o.actions.binary_search(&action).is_ok())
            .map(|o| o.choice)
    }
}

fn belief_choices(fit: &[usize]) -> Vec<BeliefChoice> {
    let mut out: Vec<_> = fit.iter().map(|&k| BeliefChoice::Point(k)).collect();
    if fit.len() > 1 {
        out.push(BeliefChoice::Uniform);
    }
    out
}

/// Per-player evaluator shared by the operators and the simulator.
#[derive(Debug, Clone)]
pub(crate) enum PlayerEval<'a> {
    Gauss(GaussPlayer<'a>),
    Tab(TabPlayer<'a>),
}

impl<'a> PlayerEval<'a> {
    pub fn new(game: &'a GameSpec, player: usize) -> Result<Self, ModelError> {
        let spec = game.player(player)?;
        Ok(match (&spec.model, &spec.payoff) {
            (ConsequenceModel::GaussianLinear(m), PayoffFn::OutcomeMinusCost { cost }) => {
                PlayerEval::Gauss(GaussPlayer {
                    game,
                    player,
                    model: m,
                    cost,
                    thetas: spec.params.points(),
                    actions: spec.actions.points(),
                })
            }
            (ConsequenceModel::TabularFinite(t), payoff) => PlayerEval::Tab(TabPlayer::new(game, player, t, payoff)),
            _ => {
                return Err(ModelError::InvalidModel {
                    player,
                    reason: "unsupported model/payoff pairing".into(),
                })
            }
        })
    }

    pub fn all(game: &'a GameSpec) -> Result<Vec<Self>, ModelError> {
        (0..game.n_players()).map(|i| Self::new(game, i)).collect()
    }

    pub fn fit(&self, sigma: &[(usize, f64)], tol: f64) -> Result<Vec<usize>, ModelError> {
        match self {
            PlayerEval::Gauss(g) => Ok(g.fit_moments(&g.moments(sigma), tol)),
            PlayerEval::Tab(t) => Ok(min_band(&t.expected_kls(sigma)?, tol)),
        }
    }

    /// Best-fitting parameters under `sigma` and the own actions they justify.
    pub fn justify(&self, sigma: &[(usize, f64)], tol: f64) -> Result<Justification, ModelError> {
        match self {
            PlayerEval::Gauss(g) => Ok(gauss_justify(g, &g.moments(sigma), tol)),
            PlayerEval::Tab(t) => {
                let fit = min_band(&t.expected_kls(sigma)?, tol);
                let values = t.action_values(sigma, &fit);
                let mut options: Vec<BeliefOption> = fit
                    .iter()
                    .zip(&values)
                    .map(|(&k, v)| BeliefOption {
                        choice: BeliefChoice::Point(k),
                        actions: max_band(v, tol),
                    })
                    .collect();
                if fit.len() > 1 {
                    let w = 1.0 / fit.len() as f64;
                    let n = values[0].len();
                    let mixed: Vec<f64> = (0..n).map(|x| values.iter().map(|v| w * v[x]).sum()).collect();
                    options.push(BeliefOption {
                        choice: BeliefChoice::Uniform,
                        actions: max_band(&mixed, tol),
                    });
                }
                Ok(Justification { fit, options })
            }
        }
    }
}

/// Justification for a Gaussian player from precomputed moments.
pub(crate) fn gauss_justify(g: &GaussPlayer<'_>, m: &Moments, tol: f64) -> Justification {
    let fit = g.fit_moments(m, tol);
    let options = belief_choices(&fit)
        .into_iter()
        .map(|choice| {
            let theta_bar = match choice {
                BeliefChoice::Point(k) => g.thetas[k],
                BeliefChoice::Uniform => {
                    // Same summation as `ParamBelief::mean` so replays agree bitwise.
                    let w = 1.0 / fit.len() as f64;
                    fit.iter().map(|&k| w * g.thetas[k]).sum()
                }
            };
            BeliefOption {
                choice,
                actions: g.best_response(theta_bar * m.eg, tol),
            }
        })
        .collect();
    Justification { fit, options }
}
