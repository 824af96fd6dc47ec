//! Posterior mass on parameters that fit worse than the best fit decays
//! exponentially while the same action is played.

use std::error::Error;

use bnlab::analytic::{effort_game, EffortExample};
use bnlab::sim::{posterior_decay_test, RunConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let ex = EffortExample::quadratic(1.0, 1.0, 2.0)?;
    let game = effort_game(&ex, 0.01)?;
    let cfg = RunConfig {
        horizon: 2000,
        replications: 20,
        seed: 5,
        ..RunConfig::default()
    };
    let profile = game.nearest_profile(&[1.0]);
    let test = posterior_decay_test(&game, 0, profile, 0.05, 50, &cfg)?;
    let params = &game.players()[0].params;
    let fit: Vec<f64> = test.fit.iter().map(|&k| params.value(k)).collect();
    println!("best fit at a = 1: {fit:?}");
    println!("{} separated parameters, {} observations", test.separated.len(), test.observations);
    println!("slope {:.3e} (t = {:.1}, p = {:.1e}), final ln mass {:.1}", test.slope, test.t_stat, test.p_value, test.final_log_mass);
    println!("exponential decay: {}", test.passed);
    Ok(())
}
