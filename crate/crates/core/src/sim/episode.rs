use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{max_band, ConsequenceModel, GameSpec, GaussPlayer, PlayerEval, DEFAULT_TOL};
use crate::solver::{logit_probabilities, LogitPerturbation, MixedProfile};

use super::forecast::ForecastState;
use super::posterior::PosteriorState;
use super::SimError;

/// Settings for a batch of simulated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    /// Keep a posterior/forecast snapshot every `thinning` periods (0: none).
    pub thinning: usize,
    /// Trailing fraction of the run used to detect limit points.
    pub window: f64,
    /// Containment tolerance in action units (sup norm).
    pub eps: f64,
    /// Forecast prior mass `a0`.
    pub prior_mass: f64,
    /// Band width for best-response ties.
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 1000,
            replications: 1,
            seed: 0,
            thinning: 0,
            window: 0.2,
            eps: 0.02,
            prior_mass: 1.0,
            tol: DEFAULT_TOL,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.horizon < 1 {
            return bad("horizon must be at least 1");
        }
        if self.replications < 1 {
            return bad("replications must be at least 1");
        }
        if !(self.window > 0.0 && self.window < 1.0) {
            return bad("window must lie in (0, 1)");
        }
        if !(self.eps >= 0.0) {
            return bad("eps must be nonnegative");
        }
        if !(self.prior_mass > 0.0) {
            return bad("prior mass must be positive");
        }
        if !(self.tol >= 0.0) {
            return bad("tol must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSnapshot {
    pub prior_weight: f64,
    pub counts: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub posteriors: Vec<Vec<f64>>,
    pub forecasts: Vec<ForecastSnapshot>,
}

/// Record of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningTrace {
    pub replication: usize,
    pub players: usize,
    /// Chosen profile in each period.
    pub profiles: Vec<usize>,
    /// Realized outcomes, `players` per period.
    pub outcomes: Vec<f64>,
    /// Posterior mean parameter after each period's update, `players` per period.
    pub posterior_means: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Visit counts over the whole run, sorted by profile.
    pub final_counts: Vec<(usize, u64)>,
    /// Intended mixed profile in the last period of a perturbed run.
    pub intended: Option<MixedProfile>,
}

impl LearningTrace {
    /// Trace made of forced profiles only (no outcomes), for checking the
    /// containment checker itself.
    pub fn forced(players: usize, profiles: Vec<usize>) -> Self {
        let n = profiles.len() * players;
        Self {
            replication: 0,
            players,
            profiles,
            outcomes: vec![f64::NAN; n],
            posterior_means: vec![f64::NAN; n],
            snapshots: Vec::new(),
            final_counts: Vec::new(),
            intended: None,
        }
        .with_counts()
    }

    fn with_counts(mut self) -> Self {
        let mut counts = std::collections::BTreeMap::new();
        for &p in &self.profiles {
            *counts.entry(p).or_insert(0u64) += 1;
        }
        self.final_counts = counts.into_iter().collect();
        self
    }

    /// Stored empirical distribution at the horizon.
    pub fn sigma(&self) -> Vec<(usize, f64)> {
        let t = self.profiles.len() as f64;
        self.final_counts.iter().map(|&(p, c)| (p, c as f64 / t)).collect()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Empirical profile distribution after the first `t` periods: visit
    /// counts divided by `t`, sorted by profile.
    pub fn empirical(&self, t: usize) -> Vec<(usize, f64)> {
        let mut counts = std::collections::BTreeMap::new();
        for &p in &self.profiles[..t] {
            *counts.entry(p).or_insert(0u64) += 1;
        }
        counts.into_iter().map(|(p, c)| (p, c as f64 / t as f64)).collect()
    }

    pub fn outcome(&self, t: usize, player: usize) -> f64 {
        self.outcomes[t * self.players + player]
    }

    pub fn posterior_mean(&self, t: usize, player: usize) -> f64 {
        self.posterior_means[t * self.players + player]
    }
}

/// Independent random stream for `(seed, replication, player, purpose)`.
pub fn stream_rng(seed: u64, replication: usize, player: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replication as u64) << 32) | ((player as u64) << 2) | purpose);
    rng
}

enum Agent<'a> {
    Gauss { g: GaussPlayer<'a>, feature: usize },
    Tab { eval: PlayerEval<'a> },
}

struct PlayerState<'a> {
    agent: Agent<'a>,
    thetas: &'a [f64],
    posterior: PosteriorState,
    forecast: ForecastState,
    outcome_rng: ChaCha8Rng,
    choice_rng: ChaCha8Rng,
}

impl PlayerState<'_> {
    /// Own action index and, under perturbation, the intended mixed strategy.
    fn choose(&mut self, perturb: Option<&LogitPerturbation>, tol: f64) -> (usize, Option<Vec<f64>>) {
        let utils = match &self.agent {
            Agent::Gauss { g, feature } => {
                let theta_bar = self.posterior.mean(self.thetas);
                let eg = self.forecast.feature_mean(*feature);
                match perturb {
                    None => return (g.best_response(theta_bar * eg, tol)[0], None),
                    Some(_) => g
                        .actions
                        .iter()
                        .map(|&x| theta_bar * g.model.regressor(x, eg) - g.cost.cost(x))
                        .collect::<Vec<f64>>(),
                }
            }
            Agent::Tab { eval } => {
                let PlayerEval::Tab(t) = eval else { unreachable!() };
                t.utilities_against(&self.posterior.weights(), &self.forecast.pairs())
            }
        };
        match perturb {
            None => (max_band(&utils, tol)[0], None),
            Some(p) => {
                let probs = logit_probabilities(&utils, p.lambda());
                let u: f64 = self.choice_rng.random();
                let mut acc = 0.0;
                let mut pick = probs.len() - 1;
                for (k, &q) in probs.iter().enumerate() {
                    acc += q;
                    if u < acc {
                        pick = k;
                        break;
                    }
                }
                (pick, Some(probs))
            }
        }
    }
}

pub(super) fn draw_outcome(game: &GameSpec, player: usize, profile: usize, rng: &mut ChaCha8Rng) -> f64 {
    match &game.players()[player].model {
        ConsequenceModel::GaussianLinear(m) => {
            let own = game.action_value(profile, player);
            let g = m.interaction.eval(&game.action_values(profile));
            let z: f64 = StandardNormal.sample(rng);
            m.true_mean(own, g) + z
        }
        ConsequenceModel::TabularFinite(t) => {
            let u: f64 = rng.random();
            let row = &t.truth[profile];
            let mut acc = 0.0;
            for (k, &q) in row.iter().enumerate() {
                acc += q;
                if u < acc {
                    return t.outcomes[k];
                }
            }
            // Rounding left a sliver at the top: take the last possible outcome.
            let last = row.iter().rposition(|&q| q > 0.0).unwrap_or(row.len() - 1);
            t.outcomes[last]
        }
    }
}

/// Simulates one run of the myopic learning dynamic.
pub fn run_episode(
    game: &GameSpec,
    cfg: &RunConfig,
    perturb: Option<&LogitPerturbation>,
    replication: usize,
) -> Result<LearningTrace, SimError> {
    cfg.validate()?;
    let grid = game.grid();
    let n = game.n_players();
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        let spec = &game.players()[i];
        let mut forecast = ForecastState::uniform(grid.opp_len(i), cfg.prior_mass)?;
        let agent = match PlayerEval::new(game, i)? {
            PlayerEval::Gauss(g) => {
                let values = (0..grid.opp_len(i)).map(|c| g.g(grid.join(i, 0, c))).collect();
                let feature = forecast.track(values);
                Agent::Gauss { g, feature }
            }
            eval => Agent::Tab { eval },
        };
        states.push(PlayerState {
            agent,
            thetas: spec.params.points(),
            posterior: PosteriorState::uniform(spec.params.len()),
            forecast,
            outcome_rng: stream_rng(cfg.seed, replication, i, 0),
            choice_rng: stream_rng(cfg.seed, replication, i, 1),
        });
    }
    let horizon = cfg.horizon;
    let mut trace = LearningTrace {
        replication,
        players: n,
        profiles: Vec::with_capacity(horizon),
        outcomes: Vec::with_capacity(horizon * n),
        posterior_means: Vec::with_capacity(horizon * n),
        snapshots: Vec::new(),
        final_counts: Vec::new(),
        intended: None,
    };
    let mut visits = std::collections::BTreeMap::new();
    let mut coords = vec![0usize; n];
    let mut intended: Vec<Vec<f64>> = vec![Vec::new(); n];
    for t in 1..=horizon {
        for (i, s) in states.iter_mut().enumerate() {
            debug_assert!(s.forecast.support_floor() > 0.0);
            let (x, probs) = s.choose(perturb, cfg.tol);
            coords[i] = x;
            if let Some(p) = probs {
                intended[i] = p;
            }
        }
        let profile = grid.encode(&coords);
        trace.profiles.push(profile);
        *visits.entry(profile).or_insert(0u64) += 1;
        for (i, s) in states.iter_mut().enumerate() {
            let y = draw_outcome(game, i, profile, &mut s.outcome_rng);
            trace.outcomes.push(y);
            match &s.agent {
                Agent::Gauss { g, .. } => {
                    let r = g.model.regressor(g.own(profile), g.g(profile));
                    let thetas = s.thetas;
                    s.posterior.update(i, |k| {
                        let d = y - thetas[k] * r;
                        -0.5 * d * d
                    })?;
                }
                Agent::Tab { .. } => {
                    let ConsequenceModel::TabularFinite(tab) = &game.players()[i].model else {
                        unreachable!()
                    };
                    let yk = tab.outcome_index(y).expect("drawn from the outcome list");
                    s.posterior.update(i, |k| tab.family[k][profile][yk].ln())?;
                }
            }
            trace.posterior_means.push(s.posterior.mean(s.thetas));
            s.forecast.update(grid.opp_index(profile, i));
        }
        if cfg.thinning > 0 && t % cfg.thinning == 0 {
            trace.snapshots.push(Snapshot {
                t,
                posteriors: states.iter().map(|s| s.posterior.weights()).collect(),
                forecasts: states
                    .iter()
                    .map(|s| ForecastSnapshot {
                        prior_weight: s.forecast.prior_weight(),
                        counts: s.forecast.counts().iter().map(|(&c, &k)| (c, k)).collect(),
                    })
                    .collect(),
            });
        }
    }
    trace.final_counts = visits.into_iter().collect();
    if perturb.is_some() {
        trace.intended = Some(MixedProfile(intended));
    }
    Ok(trace)
}

/// Runs `cfg.replications` independent runs in parallel and maps each trace
/// through `summarize` as soon as it finishes. Results come back in
/// replication order.
pub fn run_replications<R: Send>(
    game: &GameSpec,
    cfg: &RunConfig,
    perturb: Option<&LogitPerturbation>,
    summarize: impl Fn(LearningTrace) -> R + Sync,
) -> Result<Vec<R>, SimError> {
    cfg.validate()?;
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_episode(game, cfg, perturb, r).map(&summarize))
        .collect()
}
