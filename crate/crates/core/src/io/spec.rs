use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{ActionGrid, ConsequenceModel, GameSpec, ParamGrid, PayoffFn, PlayerSpec};
use crate::sim::RunConfig;
use crate::solver::{Operator, SigmaSearchPolicy};

use super::IoError;

pub const SPEC_VERSION: u32 = 1;

/// A grid written either as `{ min, max, count }` or as explicit points.
/// Parameter grids given as points may carry `bounds = [lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridDoc {
    Uniform { min: f64, max: f64, count: usize },
    Points {
        points: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<[f64; 2]>,
    },
}

impl GridDoc {
    fn actions(&self) -> Result<ActionGrid, IoError> {
        Ok(match self {
            GridDoc::Uniform { min, max, count } => ActionGrid::uniform(*min, *max, *count)?,
            GridDoc::Points { points, .. } => ActionGrid::new(points.clone())?,
        })
    }

    fn params(&self) -> Result<ParamGrid, IoError> {
        Ok(match self {
            GridDoc::Uniform { min, max, count } => ParamGrid::uniform(*min, *max, *count)?,
            GridDoc::Points { points, bounds } => {
                let (lo, hi) = match bounds {
                    Some([lo, hi]) => (*lo, *hi),
                    None => (
                        points.first().copied().unwrap_or(0.0),
                        points.last().copied().unwrap_or(0.0),
                    ),
                };
                ParamGrid::new(points.clone(), lo, hi)?
            }
        })
    }

    /// Respaces a uniform grid to `step`, keeping `min` and rounding the
    /// span up to a whole number of steps. Explicit points are untouched.
    pub fn respace(&mut self, step: f64) {
        if let GridDoc::Uniform { min, max, count } = self {
            let n = ((*max - *min) / step - 1e-9).ceil().max(0.0) as usize;
            *count = n + 1;
            *max = *min + step * n as f64;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDoc {
    pub name: String,
    pub actions: GridDoc,
    pub params: GridDoc,
    pub model: ConsequenceModel,
    pub payoff: PayoffFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorDoc {
    Gamma,
    Weak,
    Bp,
    Mixed,
}

impl OperatorDoc {
    pub fn pure(self) -> Option<Operator> {
        match self {
            OperatorDoc::Gamma => Some(Operator::Gamma),
            OperatorDoc::Weak => Some(Operator::Weak),
            OperatorDoc::Bp => Some(Operator::Bp),
            OperatorDoc::Mixed => None,
        }
    }
}

/// Settings for the logit cloud iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedDoc {
    pub lambda: f64,
    #[serde(default = "default_cloud_mesh")]
    pub mesh: usize,
    #[serde(default = "default_cloud_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_cloud_tol")]
    pub conv_tol: f64,
}

fn default_cloud_mesh() -> usize {
    11
}
fn default_cloud_rounds() -> usize {
    200
}
fn default_cloud_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDoc {
    pub operator: OperatorDoc,
    pub policy: SigmaSearchPolicy,
    pub tol: f64,
    pub max_rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed: Option<MixedDoc>,
}

impl Default for SolverDoc {
    fn default() -> Self {
        Self {
            operator: OperatorDoc::Gamma,
            policy: SigmaSearchPolicy::SimplexGrid {
                mesh: 5,
                max_support: 2,
            },
            tol: crate::model::DEFAULT_TOL,
            max_rounds: 100,
            mixed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDoc {
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub thinning: usize,
    pub window: f64,
    pub eps: f64,
    pub prior_mass: f64,
    /// Logit scale for perturbed runs; absent for best-response play.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Default for SimulationDoc {
    fn default() -> Self {
        let c = RunConfig::default();
        Self {
            horizon: c.horizon,
            replications: c.replications,
            seed: c.seed,
            thinning: c.thinning,
            window: c.window,
            eps: c.eps,
            prior_mass: c.prior_mass,
            lambda: None,
        }
    }
}

/// Self-describing input for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub version: u32,
    pub players: Vec<PlayerDoc>,
    #[serde(default)]
    pub solver: SolverDoc,
    #[serde(default)]
    pub simulation: SimulationDoc,
}

impl SpecDocument {
    /// Document for an existing game, keeping its grids as explicit points.
    pub fn from_game(game: &GameSpec) -> Self {
        Self {
            version: SPEC_VERSION,
            players: game
                .players()
                .iter()
                .map(|p| PlayerDoc {
                    name: p.name.clone(),
                    actions: GridDoc::Points {
                        points: p.actions.points().to_vec(),
                        bounds: None,
                    },
                    params: GridDoc::Points {
                        points: p.params.points().to_vec(),
                        bounds: Some(p.params.bounds().into()),
                    },
                    model: p.model.clone(),
                    payoff: p.payoff.clone(),
                })
                .collect(),
            solver: SolverDoc::default(),
            simulation: SimulationDoc::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, IoError> {
        let doc: Self = toml::from_str(text).map_err(|e| IoError::Schema(e.message().to_string()))?;
        doc.check()?;
        Ok(doc)
    }

    pub fn to_toml_string(&self) -> Result<String, IoError> {
        toml::to_string(self).map_err(|e| IoError::Schema(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> Result<String, IoError> {
        Ok(hex::encode(Sha256::digest(self.to_toml_string()?.as_bytes())))
    }

    fn check(&self) -> Result<(), IoError> {
        if self.version != SPEC_VERSION {
            return Err(IoError::Schema(format!(
                "unsupported version {} (expected {SPEC_VERSION})",
                self.version
            )));
        }
        if self.players.is_empty() {
            return Err(IoError::Schema("at least one player is required".into()));
        }
        for (i, p) in self.players.iter().enumerate() {
            if self.players[..i].iter().any(|q| q.name == p.name) {
                return Err(IoError::Schema(format!("duplicate player name {:?}", p.name)));
            }
        }
        Ok(())
    }

    /// Validated game; every model or grid violation is a schema error.
    pub fn to_game(&self) -> Result<GameSpec, IoError> {
        self.check()?;
        let players = self
            .players
            .iter()
            .map(|p| {
                let ctx = |e: IoError| IoError::Schema(format!("player {:?}: {e}", p.name));
                Ok(PlayerSpec {
                    name: p.name.clone(),
                    actions: p.actions.actions().map_err(ctx)?,
                    params: p.params.params().map_err(ctx)?,
                    model: p.model.clone(),
                    payoff: p.payoff.clone(),
                })
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        GameSpec::new(players).map_err(|e| IoError::Schema(e.to_string()))
    }

    pub fn run_config(&self) -> RunConfig {
        let s = &self.simulation;
        RunConfig {
            horizon: s.horizon,
            replications: s.replications,
            seed: s.seed,
            thinning: s.thinning,
            window: s.window,
            eps: s.eps,
            prior_mass: s.prior_mass,
            tol: self.solver.tol,
        }
    }

    pub fn respace(&mut self, step: f64) {
        for p in self.players.iter_mut() {
            p.actions.respace(step);
            p.params.respace(step);
        }
    }
}
