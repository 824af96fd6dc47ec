use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::model::{kl_minimizer_set, GameSpec, ProfileMixture};
use crate::solver::{MixedProfileCloud, SurvivorSet};

use super::episode::{draw_outcome, stream_rng, LearningTrace, RunConfig};
use super::posterior::{posterior_update, PosteriorState};
use super::SimError;

const MIN_TRACE: usize = 10;

/// Profiles visited at least once in the trailing `cfg.window` fraction of
/// the run, sorted and deduplicated.
pub fn limit_points(trace: &LearningTrace, cfg: &RunConfig) -> Result<Vec<usize>, SimError> {
    let t = trace.len();
    if t < MIN_TRACE {
        return Err(SimError::TraceTooShort(t));
    }
    let w = ((cfg.window * t as f64).ceil() as usize).clamp(1, t);
    let mut pts: Vec<usize> = trace.profiles[t - w..].to_vec();
    pts.sort_unstable();
    pts.dedup();
    Ok(pts)
}

/// Sup-norm distance in action units from `profile` to the nearest member of
/// `set` (infinite when the set is empty).
pub fn distance_to_set(game: &GameSpec, profile: usize, set: &SurvivorSet) -> f64 {
    if set.contains(profile) {
        return 0.0;
    }
    let here = game.action_values(profile);
    let mut best = f64::INFINITY;
    for q in set.iter() {
        let mut d: f64 = 0.0;
        for (i, &x) in here.iter().enumerate() {
            d = d.max((x - game.action_value(q, i)).abs());
            if d >= best {
                break;
            }
        }
        best = best.min(d);
        if best == 0.0 {
            break;
        }
    }
    best
}

/// Containment verdict for a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceContainment {
    pub replication: usize,
    pub limit_points: Vec<usize>,
    /// Fraction of limit points within `eps` of the survivor set.
    pub fraction_inside: f64,
    pub max_distance: f64,
    pub contained: bool,
    /// Distance from the final intended mixed profile to the cloud.
    pub intended_distance: Option<f64>,
}

impl TraceContainment {
    pub fn evaluate(
        game: &GameSpec,
        trace: &LearningTrace,
        survivors: &SurvivorSet,
        cfg: &RunConfig,
        cloud: Option<&MixedProfileCloud>,
    ) -> Result<Self, SimError> {
        let pts = limit_points(trace, cfg)?;
        let dists: Vec<f64> = pts.iter().map(|&p| distance_to_set(game, p, survivors)).collect();
        let inside = dists.iter().filter(|&&d| d <= cfg.eps).count();
        let max_distance = dists.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            replication: trace.replication,
            fraction_inside: inside as f64 / pts.len() as f64,
            contained: inside == pts.len(),
            max_distance,
            limit_points: pts,
            intended_distance: match (cloud, &trace.intended) {
                (Some(c), Some(m)) => Some(c.distance_to(m)),
                _ => None,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub eps: f64,
    pub window: f64,
    pub traces: Vec<TraceContainment>,
    /// Share of traces whose limit points all lie within `eps` of the survivors.
    pub pass_rate: f64,
}

impl ContainmentReport {
    pub fn from_traces(traces: Vec<TraceContainment>, cfg: &RunConfig) -> Self {
        let passed = traces.iter().filter(|t| t.contained).count();
        let pass_rate = if traces.is_empty() {
            0.0
        } else {
            passed as f64 / traces.len() as f64
        };
        Self {
            eps: cfg.eps,
            window: cfg.window,
            traces,
            pass_rate,
        }
    }

    /// Share of perturbed traces whose intended profile is within `radius` of the cloud.
    pub fn intended_rate(&self, radius: f64) -> Option<f64> {
        let d: Vec<f64> = self.traces.iter().filter_map(|t| t.intended_distance).collect();
        if d.is_empty() {
            return None;
        }
        Some(d.iter().filter(|&&x| x <= radius).count() as f64 / d.len() as f64)
    }
}

pub fn containment_report(
    game: &GameSpec,
    traces: &[LearningTrace],
    survivors: &SurvivorSet,
    cfg: &RunConfig,
    cloud: Option<&MixedProfileCloud>,
) -> Result<ContainmentReport, SimError> {
    if survivors.grid_len() != game.n_profiles() {
        return Err(crate::solver::SolverError::GridMismatch.into());
    }
    let items = traces
        .iter()
        .map(|t| TraceContainment::evaluate(game, t, survivors, cfg, cloud))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ContainmentReport::from_traces(items, cfg))
}

/// Result of regressing `ln mu_t(E)` on `t` for a player whose play is held
/// at one profile, where `E` is the set of parameters farther than a band
/// from the best fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTest {
    pub player: usize,
    pub profile: usize,
    pub band: f64,
    pub fit: Vec<usize>,
    pub separated: Vec<usize>,
    pub observations: usize,
    pub slope: f64,
    pub intercept: f64,
    pub t_stat: f64,
    /// One-sided p-value for a negative slope.
    pub p_value: f64,
    /// Mean over replications of `ln mu_T(E)`.
    pub final_log_mass: f64,
    pub passed: bool,
}

/// Runs `cfg.replications` fixed-profile posterior sequences for `player`,
/// records `ln mu_t(E)` every `stride` periods and fits a pooled line.
pub fn posterior_decay_test(
    game: &GameSpec,
    player: usize,
    profile: usize,
    band: f64,
    stride: usize,
    cfg: &RunConfig,
) -> Result<DecayTest, SimError> {
    cfg.validate()?;
    if stride == 0 || stride > cfg.horizon {
        return Err(SimError::InvalidConfig("stride must lie in 1..=horizon".into()));
    }
    if profile >= game.n_profiles() {
        return Err(SimError::InvalidConfig("profile out of range".into()));
    }
    let params = &game.player(player)?.params;
    let sigma = ProfileMixture::point(profile);
    let fit = kl_minimizer_set(game, &sigma, player, cfg.tol)?;
    let separated: Vec<usize> = (0..params.len())
        .filter(|&k| {
            fit.iter()
                .all(|&j| (params.value(k) - params.value(j)).abs() > band)
        })
        .collect();
    if separated.is_empty() {
        return Err(SimError::InvalidConfig("no parameter is separated from the fit set".into()));
    }
    let mut in_e = vec![false; params.len()];
    for &k in &separated {
        in_e[k] = true;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut finals = Vec::new();
    for rep in 0..cfg.replications {
        let mut rng = stream_rng(cfg.seed, rep, player, 2);
        let mut post = PosteriorState::uniform(params.len());
        for t in 1..=cfg.horizon {
            let y = draw_outcome(game, player, profile, &mut rng);
            posterior_update(game, &mut post, player, profile, y)?;
            if t % stride == 0 {
                let lm = post.log_mass(|k| in_e[k]);
                xs.push(t as f64);
                ys.push(lm);
                if t == cfg.horizon - cfg.horizon % stride {
                    finals.push(lm);
                }
            }
        }
    }
    let (slope, intercept, t_stat) = ols(&xs, &ys);
    let dof = xs.len() as f64 - 2.0;
    let p_value = if dof >= 1.0 && t_stat.is_finite() {
        StudentsT::new(0.0, 1.0, dof).map(|d| d.cdf(t_stat)).unwrap_or(f64::NAN)
    } else if t_stat == f64::NEG_INFINITY {
        0.0
    } else {
        f64::NAN
    };
    Ok(DecayTest {
        player,
        profile,
        band,
        fit,
        separated,
        observations: xs.len(),
        slope,
        intercept,
        t_stat,
        p_value,
        final_log_mass: finals.iter().sum::<f64>() / finals.len() as f64,
        passed: slope < 0.0 && p_value < 0.01,
    })
}

/// Least-squares line; returns slope, intercept and the slope's t statistic.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let se = (sse / (n - 2.0) / sxx).sqrt();
    let t = if se > 0.0 {
        slope / se
    } else if slope < 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    (slope, intercept, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, -1.0, -3.0, -5.0];
        let (b, a, t) = ols(&x, &y);
        assert!((b + 2.0).abs() < 1e-12 && (a - 3.0).abs() < 1e-12);
        assert_eq!(t, f64::NEG_INFINITY);
    }

    #[test]
    fn window_limit_points() {
        let cfg = RunConfig::default();
        let tr = LearningTrace::forced(1, (0..20).map(|t| if t < 10 { 5 } else { t % 2 }).collect());
        assert_eq!(limit_points(&tr, &cfg).unwrap(), vec![0, 1]);
        let short = LearningTrace::forced(1, vec![0; 9]);
        assert!(matches!(limit_points(&short, &cfg), Err(SimError::TraceTooShort(9))));
    }
}
