use serde::{Deserialize, Serialize};

use crate::model::{GameSpec, PlayerEval};

use super::policy::compositions;
use super::SolverError;

/// Largest cloud [`simplex_cloud`] will build.
pub const MAX_CLOUD: usize = 1_000_000;

/// Scale of type-I extreme-value payoff shocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitPerturbation {
    lambda: f64,
}

impl LogitPerturbation {
    pub fn new(lambda: f64) -> Result<Self, SolverError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(SolverError::InvalidPerturbation("lambda must be positive".into()));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Choice probabilities proportional to `exp(u / lambda)`.
pub fn logit_probabilities(utils: &[f64], lambda: f64) -> Vec<f64> {
    let top = utils.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = utils.iter().map(|u| ((u - top) / lambda).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile(pub Vec<Vec<f64>>);

impl MixedProfile {
    /// Sup-norm distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn pure(game: &GameSpec, profile: usize) -> Self {
        let grid = game.grid();
        MixedProfile(
            grid.dims()
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let mut v = vec![0.0; d];
                    v[grid.coord(profile, i)] = 1.0;
                    v
                })
                .collect(),
        )
    }

    /// The induced product distribution over profiles (positive weights only).
    pub fn product(&self, game: &GameSpec) -> Vec<(usize, f64)> {
        let grid = game.grid();
        let mut out = vec![(0usize, 1.0f64)];
        for (i, s) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * s.len());
            for &(p, w) in &out {
                for (x, &q) in s.iter().enumerate() {
                    if q > 0.0 {
                        next.push((grid.with_coord(p, i, x), w * q));
                    }
                }
            }
            out = next;
        }
        out
    }
}

/// A finite set of mixed profiles standing in for a set of intended strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfileCloud {
    pub points: Vec<MixedProfile>,
}

impl MixedProfileCloud {
    /// Smallest sup-norm distance from `point` to the cloud.
    pub fn distance_to(&self, point: &MixedProfile) -> f64 {
        self.points
            .iter()
            .map(|q| q.distance(point))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance from any cloud point to `point`.
    pub fn spread_around(&self, point: &MixedProfile) -> f64 {
        self.points.iter().map(|q| q.distance(point)).fold(0.0, f64::max)
    }
}

/// Product of per-player simplex meshes with `mesh` points per edge.
pub fn simplex_cloud(game: &GameSpec, mesh: usize) -> Result<MixedProfileCloud, SolverError> {
    if mesh < 2 {
        return Err(SolverError::InvalidPolicy("mesh must be at least 2".into()));
    }
    let units = mesh - 1;
    let per_player: Vec<Vec<Vec<f64>>> = game
        .grid()
        .dims()
        .iter()
        .map(|&d| {
            let mut pts = Vec::new();
            for k in 1..=d.min(units) {
                for support in super::policy::subsets(&(0..d).collect::<Vec<_>>(), k) {
                    for comp in compositions(units, k) {
                        let mut v = vec![0.0; d];
                        for (&x, &c) in support.iter().zip(&comp) {
                            v[x] = c as f64 / units as f64;
                        }
                        pts.push(v);
                    }
                }
            }
            pts
        })
        .collect();
    let total = per_player.iter().map(|p| p.len()).try_fold(1usize, |a, b| a.checked_mul(b));
    if total.is_none_or(|t| t > MAX_CLOUD) {
        return Err(SolverError::SearchTooLarge {
            candidates: per_player.iter().map(|p| p.len() as u128).product(),
        });
    }
    let mut points = vec![Vec::new()];
    for opts in &per_player {
        points = points
            .into_iter()
            .flat_map(|prefix: Vec<Vec<f64>>| {
                opts.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    Ok(MixedProfileCloud {
        points: points.into_iter().map(MixedProfile).collect(),
    })
}

fn respond(
    game: &GameSpec,
    evals: &[PlayerEval<'_>],
    point: &MixedProfile,
    lambda: f64,
    tol: f64,
) -> Result<MixedProfile, SolverError> {
    let sigma = point.product(game);
    let mut out = Vec::with_capacity(evals.len());
    for (i, e) in evals.iter().enumerate() {
        let fit = e.fit(&sigma, tol)?;
        if fit.len() != 1 {
            return Err(SolverError::UnidentifiedModel { player: i });
        }
        let theta = fit[0];
        let utils: Vec<f64> = match e {
            PlayerEval::Tab(t) => t.action_values(&sigma, &[theta]).remove(0),
            PlayerEval::Gauss(g) => {
                let eg: f64 = sigma.iter().map(|&(p, w)| w * g.g(p)).sum();
                let th = g.thetas[theta];
                g.actions
                    .iter()
                    .map(|&x| th * g.model.regressor(x, eg) - g.cost.cost(x))
                    .collect()
            }
        };
        out.push(logit_probabilities(&utils, lambda));
    }
    Ok(MixedProfile(out))
}

/// Maps every cloud point to the profile of logit responses against it,
/// with beliefs at the unique best-fitting parameter.
pub fn phi_mixed_step(
    game: &GameSpec,
    cloud: &MixedProfileCloud,
    perturb: &LogitPerturbation,
    tol: f64,
) -> Result<MixedProfileCloud, SolverError> {
    use rayon::prelude::*;
    let evals = PlayerEval::all(game)?;
    let points = cloud
        .points
        .par_iter()
        .map(|p| respond(game, &evals, p, perturb.lambda(), tol))
        .collect::<Result<_, _>>()?;
    Ok(MixedProfileCloud { points })
}

/// Result of iterating the logit image of a cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudRun {
    pub cloud: MixedProfileCloud,
    pub rounds: usize,
    pub converged: bool,
}

/// Applies [`phi_mixed_step`] until no point moves more than `conv_tol`
/// (sup norm) or `max_rounds` is reached.
pub fn iterate_cloud(
    game: &GameSpec,
    cloud: MixedProfileCloud,
    perturb: &LogitPerturbation,
    max_rounds: usize,
    conv_tol: f64,
    tol: f64,
) -> Result<CloudRun, SolverError> {
    let mut cur = cloud;
    for round in 1..=max_rounds {
        let next = phi_mixed_step(game, &cur, perturb, tol)?;
        let moved = next
            .points
            .iter()
            .zip(&cur.points)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max);
        cur = next;
        if moved < conv_tol {
            return Ok(CloudRun {
                cloud: cur,
                rounds: round,
                converged: true,
            });
        }
    }
    Ok(CloudRun {
        cloud: cur,
        rounds: max_rounds,
        converged: false,
    })
}

/// Iterates the cloud at each scale in turn, warm-starting from the
/// previous image.
pub fn anneal_cloud(
    game: &GameSpec,
    cloud: MixedProfileCloud,
    lambdas: &[f64],
    rounds_per_scale: usize,
    tol: f64,
) -> Result<MixedProfileCloud, SolverError> {
    let mut cur = cloud;
    for &lambda in lambdas {
        let perturb = LogitPerturbation::new(lambda)?;
        cur = iterate_cloud(game, cur, &perturb, rounds_per_scale, 1e-12, tol)?.cloud;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_action_logistic() {
        let p = logit_probabilities(&[1.0, 0.0], 1.0);
        let expect = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((p[0] - expect).abs() < 1e-15);
        assert!((p[1] - (1.0 - expect)).abs() < 1e-15);
    }

    #[test]
    fn equal_utilities_are_uniform() {
        let p = logit_probabilities(&[2.0; 4], 0.3);
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn tiny_scale_is_stable() {
        let p = logit_probabilities(&[1.0, 0.0, 0.5], 1e-6);
        assert_eq!(p[0], 1.0);
        assert!(LogitPerturbation::new(0.0).is_err());
    }
}
