use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::GameSpec;

use super::gamma::{gamma_apply, gamma_bp_apply, gamma_weak_apply, Application};
use super::survivors::SurvivorSet;
use super::witness::WitnessBook;
use super::{SigmaSearchPolicy, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    /// Common witness mixture.
    Gamma,
    /// Player-specific witness mixtures.
    Weak,
    /// Player-by-player conjectures on product sets.
    Bp,
}

impl Operator {
    pub fn apply(
        self,
        game: &GameSpec,
        a: &SurvivorSet,
        policy: &SigmaSearchPolicy,
        tol: f64,
    ) -> Result<Application, SolverError> {
        match self {
            Operator::Gamma => gamma_apply(game, a, policy, tol),
            Operator::Weak => gamma_weak_apply(game, a, policy, tol),
            Operator::Bp => gamma_bp_apply(game, a, policy, tol),
        }
    }
}

/// Summary of one iteration round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub survivors: usize,
    /// Per-player smallest and largest surviving action value.
    pub min_action: Vec<f64>,
    pub max_action: Vec<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub operator: Operator,
    pub survivors: SurvivorSet,
    pub history: Vec<RoundRecord>,
    /// Witnesses from the last application, restricted to the survivors.
    pub witnesses: WitnessBook,
    pub converged: bool,
}

impl FixedPoint {
    /// Per-player `[min, max]` of surviving action values.
    pub fn ranges(&self, game: &GameSpec) -> Vec<(f64, f64)> {
        let proj = self.survivors.projections(game.grid());
        proj.iter()
            .zip(game.players())
            .map(|(row, p)| {
                let idx: Vec<usize> = (0..row.len()).filter(|&x| row[x]).collect();
                (p.actions.value(idx[0]), p.actions.value(idx[idx.len() - 1]))
            })
            .collect()
    }
}

fn record(game: &GameSpec, set: &SurvivorSet, round: usize, seconds: f64) -> RoundRecord {
    let proj = set.projections(game.grid());
    let (min_action, max_action) = proj
        .iter()
        .zip(game.players())
        .map(|(row, p)| {
            let first = row.iter().position(|&b| b);
            let last = row.iter().rposition(|&b| b);
            match (first, last) {
                (Some(f), Some(l)) => (p.actions.value(f), p.actions.value(l)),
                _ => (f64::NAN, f64::NAN),
            }
        })
        .unzip();
    RoundRecord {
        round,
        survivors: set.count(),
        min_action,
        max_action,
        seconds,
    }
}

/// Iterates `B <- op(B) ∩ B` from the full grid until the bitmask stops
/// changing. The final set is justified by witnesses supported in itself.
pub fn iterate_to_fixed(
    game: &GameSpec,
    operator: Operator,
    policy: &SigmaSearchPolicy,
    max_rounds: usize,
    tol: f64,
) -> Result<FixedPoint, SolverError> {
    if max_rounds < 1 {
        return Err(SolverError::InvalidPolicy("max_rounds must be at least 1".into()));
    }
    let grid = game.grid();
    let mut current = SurvivorSet::full(game.n_profiles());
    let mut history = Vec::new();
    let mut last_book = WitnessBook::default();
    for round in 1..=max_rounds {
        let start = Instant::now();
        let app = operator.apply(game, &current, policy, tol)?;
        let next = app.survivors.intersect(&current).with_round(round);
        if next.is_empty() {
            return Err(SolverError::EmptySurvivorSet);
        }
        history.push(record(game, &next, round, start.elapsed().as_secs_f64()));
        if next.same_profiles(&current) {
            return Ok(FixedPoint {
                operator,
                witnesses: app.witnesses.restrict(&next, grid),
                survivors: next,
                history,
                converged: true,
            });
        }
        last_book = app.witnesses.restrict(&next, grid);
        current = next;
    }
    Err(SolverError::NotConverged {
        rounds: max_rounds,
        partial: Box::new(FixedPoint {
            operator,
            survivors: current,
            history,
            witnesses: last_book,
            converged: false,
        }),
    })
}
