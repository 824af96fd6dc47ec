//! Runs the learning dynamic on the overconfident effort problem and checks
//! that long-run play stays in the solver's fixed set.
//!
//! `cargo run --release --example learning_containment -- 20 20000`

use std::error::Error;

use bnlab::analytic::{effort_game, EffortExample};
use bnlab::sim::{containment_report, run_replications, RunConfig};
use bnlab::solver::{iterate_to_fixed, Operator, SigmaSearchPolicy};

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let horizon: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let ex = EffortExample::quadratic(1.0, 1.0, 2.0)?;
    let game = effort_game(&ex, 0.01)?;
    let fixed = iterate_to_fixed(&game, Operator::Gamma, &SigmaSearchPolicy::StructuredMoments, 1000, 1e-9)?;
    let cfg = RunConfig {
        horizon,
        replications: reps,
        seed: 11,
        eps: 0.02,
        ..RunConfig::default()
    };
    let traces = run_replications(&game, &cfg, None, |t| t)?;
    let report = containment_report(&game, &traces, &fixed.survivors, &cfg, None)?;
    for t in &report.traces {
        let pts: Vec<f64> = t.limit_points.iter().map(|&p| game.action_value(p, 0)).collect();
        println!("rep {:>3}: limit points {pts:?}, contained {}", t.replication, t.contained);
    }
    println!("fixed set {:?}, pass rate {:.2}", fixed.ranges(&game)[0], report.pass_rate);
    Ok(())
}
