//! Manager and two workers. The manager is overconfident; the workers learn
//! to collaborate or not depending on the threshold `k` relative to `k*`.
//!
//! `cargo run --release --example team -- 0.105`

use std::error::Error;

use bnlab::analytic::{team_diff, team_game, team_limits, TeamExample};
use bnlab::solver::{iterate_to_fixed, Operator, SigmaSearchPolicy};

fn main() -> Result<(), Box<dyn Error>> {
    let k: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.105);
    let ex = TeamExample::quadratic(1.0, 1.0, 2.0, k)?;
    let lim = team_limits(&ex, 1e-13)?;
    println!("M = {:.6}, N = {:.6}, k* = {:.6}", lim.m_inf, lim.n_inf, lim.k_star);
    for mu in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let m = mu * lim.m_inf;
        println!("  diff at mu = {m:.3}: {:.6}", team_diff(&ex, lim.m_inf, lim.n_inf, m));
    }
    let verdict = if k > lim.k_star { "workers stay close" } else { "gap can exceed k" };
    println!("k = {k}: {verdict}");

    let game = team_game(&ex, 0.02, 1.0, 0.01)?;
    let fixed = iterate_to_fixed(&game, Operator::Gamma, &SigmaSearchPolicy::StructuredMoments, 1000, 1e-9)?;
    println!("grid survivors: {}", fixed.survivors.count());
    for p in fixed.survivors.iter().take(5) {
        println!("  {:?}", game.action_values(p));
    }
    Ok(())
}
