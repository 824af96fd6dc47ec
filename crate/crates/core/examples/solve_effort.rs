//! Solves the overconfident effort problem on a grid and compares the
//! surviving interval with the closed-form fixed point.
//!
//! `cargo run --release --example solve_effort -- 0.001`

use std::error::Error;

use bnlab::analytic::{effort_game, effort_rationalizable_interval, EffortExample};
use bnlab::solver::{iterate_to_fixed, Operator, SigmaSearchPolicy};

fn main() -> Result<(), Box<dyn Error>> {
    let step: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-3);
    let ex = EffortExample::quadratic(1.0, 1.0, 2.0)?;
    let game = effort_game(&ex, step)?;
    let fixed = iterate_to_fixed(&game, Operator::Gamma, &SigmaSearchPolicy::StructuredMoments, 1000, 1e-9)?;
    for r in &fixed.history {
        let (lo, hi) = (r.min_action[0], r.max_action[0]);
        println!("round {:>2}: {:>5} survivors, a in [{lo:.4}, {hi:.4}]", r.round, r.survivors);
    }
    let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 100_000)?;
    let (glo, ghi) = fixed.ranges(&game)[0];
    println!("grid interval     [{glo:.6}, {ghi:.6}] (step {step})");
    println!("analytic interval [{lo:.6}, {hi:.6}]");
    Ok(())
}
