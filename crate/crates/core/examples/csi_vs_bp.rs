//! In a correctly specified team every profile in the box is
//! rationalizable when each player may hold a separate conjecture, but a
//! common conjecture pins down the equilibrium.

use std::error::Error;

use bnlab::analytic::{team_csi_profile, team_game, TeamExample};
use bnlab::solver::{iterate_to_fixed, Operator, SigmaSearchPolicy};

fn main() -> Result<(), Box<dyn Error>> {
    let ex = TeamExample::quadratic(1.0, 1.0, 1.0, 0.105)?;
    let game = team_game(&ex, 0.05, 1.0, 0.05)?;
    println!("grid: {} profiles", game.n_profiles());
    for op in [Operator::Gamma, Operator::Weak, Operator::Bp] {
        let fixed = iterate_to_fixed(&game, op, &SigmaSearchPolicy::StructuredMoments, 1000, 1e-9)?;
        println!("{op:?}: {} survivors, ranges {:?}", fixed.survivors.count(), fixed.ranges(&game));
    }
    println!("analytic common-conjecture profile {:?}", team_csi_profile(&ex)?);
    Ok(())
}
