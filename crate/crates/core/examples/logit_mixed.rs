//! Logit-perturbed play in a 2x2 game: the mixed-strategy operator, its
//! annealing limit, and the intended strategies of simulated learners.

use std::error::Error;

use bnlab::model::{ActionGrid, ConsequenceModel, GameSpec, ParamGrid, PayoffFn, PlayerSpec, ProfileGrid, TabularFinite};
use bnlab::sim::{run_replications, RunConfig};
use bnlab::solver::{anneal_cloud, iterate_cloud, simplex_cloud, LogitPerturbation, MixedProfile};

/// Each player gets a payoff of 1 from a success and pays `cost` for action 1.
/// The model scales the success probability by an unknown factor.
fn game() -> Result<GameSpec, Box<dyn Error>> {
    let grid = ProfileGrid::new(vec![2, 2]);
    let rows = |f: &dyn Fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
        (0..4)
            .map(|p| {
                let c = grid.decode(p);
                let q = f(c[0] as f64, c[1] as f64);
                vec![1.0 - q, q]
            })
            .collect()
    };
    let thetas = [0.5, 0.7, 0.9];
    let player = |name: &str, truth, family, cost: f64| -> Result<PlayerSpec, Box<dyn Error>> {
        Ok(PlayerSpec {
            name: name.into(),
            actions: ActionGrid::new(vec![0.0, 1.0])?,
            params: ParamGrid::new(thetas.to_vec(), 0.0, 1.0)?,
            model: ConsequenceModel::TabularFinite(TabularFinite { outcomes: vec![0.0, 1.0], truth, family }),
            payoff: PayoffFn::Table { values: vec![vec![0.0, 1.0], vec![-cost, 1.0 - cost]] },
        })
    };
    let row = player(
        "row",
        rows(&|a0, _| 0.3 + 0.4 * a0),
        thetas.iter().map(|&t| rows(&|a0, _| t * (0.5 + 0.5 * a0))).collect(),
        0.2,
    )?;
    let col = player(
        "col",
        rows(&|a0, a1| 0.2 + 0.5 * a1 * a0),
        thetas.iter().map(|&t| rows(&|a0, a1| t * (0.3 + 0.6 * a1 * a0))).collect(),
        0.15,
    )?;
    Ok(GameSpec::new(vec![row, col])?)
}

fn main() -> Result<(), Box<dyn Error>> {
    let game = game()?;
    let eq = MixedProfile::pure(&game, game.grid().encode(&[1, 1]));
    let cloud = simplex_cloud(&game, 11)?;

    let lambda = 0.1;
    let perturb = LogitPerturbation::new(lambda)?;
    let run = iterate_cloud(&game, cloud.clone(), &perturb, 1000, 1e-12, 1e-9)?;
    println!(
        "lambda {lambda}: {} rounds, converged {}, spread around (1, 1) {:.4}",
        run.rounds,
        run.converged,
        run.cloud.spread_around(&eq)
    );

    let scales = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001];
    let annealed = anneal_cloud(&game, cloud, &scales, 200, 1e-9)?;
    println!("annealed to lambda {}: spread {:.2e}", scales[scales.len() - 1], annealed.spread_around(&eq));

    let cfg = RunConfig {
        horizon: 20_000,
        replications: 10,
        seed: 21,
        ..RunConfig::default()
    };
    let dists = run_replications(&game, &cfg, Some(&perturb), |t| t.intended.as_ref().map(|m| run.cloud.distance_to(m)))?;
    for (rep, d) in dists.iter().enumerate() {
        println!("rep {rep}: intended strategy is {:.4} from the cloud", d.unwrap_or(f64::NAN));
    }
    Ok(())
}
