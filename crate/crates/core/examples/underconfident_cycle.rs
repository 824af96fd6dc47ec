//! The underconfident worker: no single action is learned, and the surviving
//! set is the interval spanned by a 2-cycle of the best-response map.

use std::error::Error;

use bnlab::analytic::{effort_equilibria, effort_game, effort_rationalizable_interval, effort_two_cycles, EffortExample};
use bnlab::solver::{iterate_to_fixed, Operator, SigmaSearchPolicy};

fn main() -> Result<(), Box<dyn Error>> {
    let ex = EffortExample::underconfident_figure()?;
    let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 1_000_000)?;
    println!("rationalizable interval [{lo:.5}, {hi:.5}]");
    println!("T(lo) = {:.5}, T(hi) = {:.5}", ex.t_map(lo), ex.t_map(hi));
    println!("equilibria {:?}", effort_equilibria(&ex, 20_000)?);
    println!("2-cycles   {:?}", effort_two_cycles(&ex, 20_000)?);

    let game = effort_game(&ex, 1e-3)?;
    let fixed = iterate_to_fixed(&game, Operator::Gamma, &SigmaSearchPolicy::StructuredMoments, 1000, 1e-9)?;
    let (glo, ghi) = fixed.ranges(&game)[0];
    println!("solver on a 0.001 grid: [{glo:.4}, {ghi:.4}] after {} rounds", fixed.history.len());
    Ok(())
}
