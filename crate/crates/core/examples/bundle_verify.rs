//! Round trip through the file formats: spec TOML in, result bundle out,
//! then an independent re-check of every certificate in the bundle.

use std::error::Error;
use std::path::PathBuf;

use bnlab::io::{cmd_solve, cmd_verify, SolveArgs, SolverFlags, VerifyArgs};

fn main() -> Result<(), Box<dyn Error>> {
    let spec = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs/team_over.toml");
    let dir = tempfile::tempdir()?;
    let out = dir.path().join("team.json");
    let bundle = cmd_solve(&SolveArgs {
        spec,
        operator: None,
        solver: SolverFlags::default(),
        seed: None,
        out: out.clone(),
    })?;
    let solve = bundle.solve.as_ref().ok_or("no solve record")?;
    println!("spec hash {}", bundle.spec_hash);
    println!("{} survivors, ranges {:?}", solve.survivor_count, solve.ranges);
    println!("bundle: {} bytes", std::fs::metadata(&out)?.len());
    let checked = cmd_verify(&VerifyArgs { bundle: out, spec: None })?;
    println!("verified {checked} certificates");
    Ok(())
}
