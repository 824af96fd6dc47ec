//! Exact witness search by linear programming.
//!
//! When every player's best-fitting parameter is the same for all mixtures
//! over the current set, membership is linear in the mixture: a profile
//! survives iff the largest uniform best-response margin over the simplex is
//! nonnegative.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use crate::model::{GameSpec, PlayerEval};

use super::search::{merge, Ctx, Mode, Partial};
use super::survivors::SurvivorSet;
use super::witness::{WitnessBook, WitnessSigma};
use super::SolverError;

const CLEAN: f64 = 1e-12;

/// Subjective utility tables under fixed parameters: `u[i][x][k]` is player
/// `i`'s utility of own action `x` against the opponents in the `k`-th
/// profile of the set.
struct Tables {
    u: Vec<Vec<Vec<f64>>>,
}

fn fixed_params(ctx: &Ctx<'_>, profiles: &[usize]) -> Result<Vec<usize>, SolverError> {
    ctx.evals
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut common: Option<usize> = None;
            for &p in profiles {
                let fit = e.fit(&[(p, 1.0)], ctx.tol)?;
                match (fit.as_slice(), common) {
                    ([k], None) => common = Some(*k),
                    ([k], Some(c)) if *k == c => {}
                    _ => {
                        return Err(SolverError::PolicyNotApplicable(format!(
                            "player {i}'s best-fitting parameter varies over the set"
                        )))
                    }
                }
            }
            Ok(common.expect("nonempty set"))
        })
        .collect()
}

fn tables(ctx: &Ctx<'_>, profiles: &[usize], thetas: &[usize]) -> Tables {
    let game = ctx.game;
    let grid = game.grid();
    let u = ctx
        .evals
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let n_x = grid.dims()[i];
            (0..n_x)
                .map(|x| {
                    profiles
                        .iter()
                        .map(|&p| {
                            let q = grid.with_coord(p, i, x);
                            match e {
                                PlayerEval::Tab(t) => t.util_at(thetas[i], q),
                                PlayerEval::Gauss(g) => {
                                    let xv = g.actions[x];
                                    g.thetas[thetas[i]] * g.model.regressor(xv, g.g(q)) - g.cost.cost(xv)
                                }
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Tables { u }
}

/// Maximizes the smallest best-response margin of the listed (player, own
/// action) requirements over mixtures on `profiles`.
fn solve(tab: &Tables, profiles: &[usize], reqs: &[(usize, usize)]) -> Option<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = profiles.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    lp.add_constraint(vars.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for &(i, a) in reqs {
        for (x, ux) in tab.u[i].iter().enumerate() {
            if x == a {
                continue;
            }
            let ua = &tab.u[i][a];
            let expr: Vec<_> = vars
                .iter()
                .enumerate()
                .map(|(k, &v)| (v, ua[k] - ux[k]))
                .chain(std::iter::once((t, -1.0)))
                .collect();
            lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
        }
    }
    let sol = lp.solve().ok()?.into_solution().ok()?;
    let weights = vars.iter().map(|&v| sol.var_value(v)).collect();
    Some((sol.objective(), weights))
}

fn cleaned(profiles: &[usize], weights: &[f64]) -> Vec<(usize, f64)> {
    let kept: Vec<(usize, f64)> = profiles
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > CLEAN)
        .map(|(&p, &w)| (p, w))
        .collect();
    let total: f64 = kept.iter().map(|x| x.1).sum();
    kept.into_iter().map(|(p, w)| (p, w / total)).collect()
}

pub(crate) fn run_lp(ctx: &Ctx<'_>, a: &SurvivorSet) -> Result<(SurvivorSet, WitnessBook), SolverError> {
    let game: &GameSpec = ctx.game;
    let grid = game.grid();
    let profiles = a.to_vec();
    let thetas = fixed_params(ctx, &profiles)?;
    let tab = tables(ctx, &profiles, &thetas);
    let n = game.n_profiles();
    // Each job is a list of (player, own action) requirements.
    let jobs: Vec<Vec<(usize, usize)>> = match ctx.mode {
        Mode::Common => (0..n)
            .map(|p| (0..game.n_players()).map(|i| (i, grid.coord(p, i))).collect())
            .collect(),
        Mode::PerPlayer => (0..game.n_players())
            .flat_map(|i| (0..grid.dims()[i]).map(move |x| vec![(i, x)]))
            .collect(),
    };
    let parts: Vec<Partial> = jobs
        .par_iter()
        .map(|reqs| {
            let mut part = Partial::new(game);
            let Some((margin, weights)) = solve(&tab, &profiles, reqs) else {
                return Ok(part);
            };
            if margin < -ctx.tol {
                return Ok(part);
            }
            let sigma = cleaned(&profiles, &weights);
            let sets = reqs
                .iter()
                .map(|&(i, x)| {
                    let j = ctx.evals[i].justify(&sigma, ctx.tol)?;
                    Ok(if j.actions().binary_search(&x).is_ok() {
                        vec![x]
                    } else {
                        vec![]
                    })
                })
                .collect::<Result<Vec<_>, SolverError>>()?;
            if sets.iter().any(|s| s.is_empty()) {
                return Ok(part);
            }
            let full_sets: Vec<Vec<usize>> = match ctx.mode {
                Mode::Common => sets,
                Mode::PerPlayer => {
                    let mut v = vec![vec![]; game.n_players()];
                    v[reqs[0].0] = sets.into_iter().next().expect("one requirement");
                    v
                }
            };
            part.record(ctx, || WitnessSigma::from_pairs(&sigma, n).expect("cleaned mixture"), &full_sets);
            Ok(part)
        })
        .collect::<Result<_, SolverError>>()?;
    Ok(merge(game, ctx.mode, parts))
}
