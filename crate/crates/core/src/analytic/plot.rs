use serde::{Deserialize, Serialize};

use super::effort::{effort_equilibria, effort_rationalizable_interval, EffortExample, Regime};
use super::team::{team_diff, team_limits, TeamExample};
use super::{AnalyticError, ROOT_TOL};

const SCAN: usize = 20_000;
const MAX_ITER: usize = 1_000_000;

/// A labelled point drawn on top of the curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

/// Curve samples (one row per abscissa) plus annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub annotations: Vec<Annotation>,
}

impl PlotData {
    pub fn annotation(&self, label: &str) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.label == label)
    }
}

fn note(label: &str, x: f64, y: f64) -> Annotation {
    Annotation {
        label: label.into(),
        x,
        y,
    }
}

/// Best-fit curve and marginal cost on `points` abscissae over
/// `[0, action_cap]`, annotated with the equilibria, the optimum under the
/// truth and the ends of the rationalizable interval.
pub fn effort_plot(ex: &EffortExample, points: usize) -> Result<PlotData, AnalyticError> {
    let points = points.max(2);
    let top = ex.action_cap();
    let rows = (0..points)
        .map(|k| {
            let a = top * k as f64 / (points - 1) as f64;
            vec![a, ex.theta_m(a), ex.cost.marginal(a)]
        })
        .collect();
    let mut annotations = Vec::new();
    let eq = effort_equilibria(ex, SCAN)?;
    if eq.len() == 3 && ex.regime() == Regime::Overconfident {
        for (label, &a) in ["a_S", "a_M", "a_L"].iter().zip(&eq) {
            annotations.push(note(label, a, ex.cost.marginal(a)));
        }
    } else {
        for (k, &a) in eq.iter().enumerate() {
            let label = if eq.len() == 1 { "bne".to_string() } else { format!("bne_{}", k + 1) };
            annotations.push(note(&label, a, ex.cost.marginal(a)));
        }
    }
    let (lo, hi) = effort_rationalizable_interval(ex, ROOT_TOL, MAX_ITER)?;
    annotations.push(note("a_min_inf", lo, ex.theta_m(lo)));
    annotations.push(note("a_max_inf", hi, ex.theta_m(hi)));
    let opt = ex.cost.inverse_marginal(ex.true_theta);
    annotations.push(note("a_opt", opt, ex.true_theta));
    Ok(PlotData {
        columns: vec!["a".into(), "theta_m".into(), "marginal_cost".into()],
        rows,
        annotations,
    })
}

/// Worker best-response bounds `L(mu)`, `U(mu)` and their gap over
/// `mu in [0, M_inf]`, annotated with `M_inf`, `N_inf` and `k*`.
pub fn team_plot(ex: &TeamExample, points: usize) -> Result<PlotData, AnalyticError> {
    let points = points.max(2);
    let lim = team_limits(ex, ROOT_TOL)?;
    let rows = (0..points)
        .map(|k| {
            let mu = lim.m_inf * k as f64 / (points - 1) as f64;
            let lower = ex
                .cost
                .inverse_marginal(mu * ex.true_theta * ex.true_ability / ex.ability);
            let d = team_diff(ex, lim.m_inf, lim.n_inf, mu);
            vec![mu, lower, lower + d, d]
        })
        .collect();
    Ok(PlotData {
        columns: vec!["mu".into(), "lower".into(), "upper".into(), "diff".into()],
        rows,
        annotations: vec![
            note("m_inf", lim.m_inf, 0.0),
            note("n_inf", lim.n_inf, 0.0),
            note("k_star", lim.k_star, 0.0),
        ],
    })
}
