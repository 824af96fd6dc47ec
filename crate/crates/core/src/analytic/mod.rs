//! Closed-form oracles for the returns-to-effort example and the
//! manager/workers team example, plus builders that turn them into grid
//! games for the generic solver.

mod effort;
mod plot;
mod team;

pub use effort::{
    effort_equilibria, effort_game, effort_game_on, effort_rationalizable_interval, effort_theta_m,
    effort_two_cycles, effort_T, EffortExample, Regime,
};
pub use plot::{effort_plot, team_plot, Annotation, PlotData};
pub use team::{team_csi_profile, team_diff, team_game, team_game_on, team_limits, TeamExample, TeamLimits};

use thiserror::Error;

use crate::model::ModelError;

/// Bracketing tolerance for every scalar root in this module.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },
    #[error("the example is not correctly specified (ability {ability} vs true ability {true_ability})")]
    NotCorrectlySpecified { ability: f64, true_ability: f64 },
    #[error("invalid example: {0}")]
    InvalidExample(String),
    #[error("no sign change of {0} on the bracket")]
    NoBracket(&'static str),
}

/// Bisection for a root of `f` on `[lo, hi]` down to width `tol`.
pub(crate) fn bisect(
    what: &'static str,
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, AnalyticError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(AnalyticError::NoBracket(what));
    }
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Uniform grid on `[0, upper]` with spacing `step`, the upper end rounded up
/// to a whole number of steps.
pub(crate) fn step_grid_count(upper: f64, step: f64) -> usize {
    (upper / step - 1e-9).ceil().max(1.0) as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect("x^2-2", |x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            bisect("x^2+1", |x| x * x + 1.0, 0.0, 1.0, 1e-12),
            Err(AnalyticError::NoBracket(_))
        ));
    }

    #[test]
    fn grid_count_rounds_up() {
        assert_eq!(step_grid_count(2.0, 1e-3), 2001);
        assert_eq!(step_grid_count(2.0005, 1e-3), 2002);
    }
}
