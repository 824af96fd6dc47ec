use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::GameSpec;
use crate::sim::{ContainmentReport, LearningTrace, RunConfig};
use crate::solver::{
    certify_action, certify_profile, Certificate, FixedPoint, MixedProfileCloud, Operator, RoundRecord,
    SigmaSearchPolicy, SurvivorSet, WitnessBook,
};

use super::spec::SpecDocument;
use super::IoError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of a survivor bitmask (length, then words, little-endian).
pub fn survivors_hash(set: &SurvivorSet) -> String {
    let mut h = Sha256::new();
    h.update((set.grid_len() as u64).to_le_bytes());
    for p in set.iter() {
        h.update((p as u64).to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub operator: Operator,
    pub policy: SigmaSearchPolicy,
    pub tol: f64,
    pub grid_len: usize,
    /// Surviving profile indices, ascending.
    pub survivors: Vec<usize>,
    pub survivors_hash: String,
    pub survivor_count: usize,
    /// Per-player `[min, max]` surviving action value.
    pub ranges: Vec<(f64, f64)>,
    pub rounds: Vec<RoundRecord>,
    pub witnesses: WitnessBook,
    /// One per surviving profile (common witnesses) or per surviving
    /// `(player, action)` pair (player-specific witnesses).
    pub certificates: Vec<Certificate>,
}

impl SolveRecord {
    pub fn survivor_set(&self) -> SurvivorSet {
        SurvivorSet::from_profiles(self.grid_len, self.survivors.iter().copied())
    }

    pub fn new(
        game: &GameSpec,
        fixed: &FixedPoint,
        policy: &SigmaSearchPolicy,
        tol: f64,
    ) -> Result<Self, IoError> {
        Ok(Self {
            operator: fixed.operator,
            policy: policy.clone(),
            tol,
            survivors_hash: survivors_hash(&fixed.survivors),
            survivor_count: fixed.survivors.count(),
            ranges: fixed.ranges(game),
            rounds: fixed.history.clone(),
            certificates: certificates(game, fixed.operator, &fixed.survivors, &fixed.witnesses, tol)?,
            grid_len: fixed.survivors.grid_len(),
            survivors: fixed.survivors.to_vec(),
            witnesses: fixed.witnesses.clone(),
        })
    }
}

fn certificates(
    game: &GameSpec,
    operator: Operator,
    survivors: &SurvivorSet,
    book: &WitnessBook,
    tol: f64,
) -> Result<Vec<Certificate>, IoError> {
    let missing = |what: String| IoError::Verify(format!("no witness for {what}"));
    match operator {
        Operator::Gamma => survivors
            .iter()
            .map(|p| {
                let sigma = book.witness_for_profile(p).ok_or_else(|| missing(format!("profile {p}")))?;
                Ok(certify_profile(game, sigma, p, tol)?)
            })
            .collect(),
        Operator::Weak | Operator::Bp => {
            let proj = survivors.projections(game.grid());
            let mut out = Vec::new();
            for (i, row) in proj.iter().enumerate() {
                for (x, _) in row.iter().enumerate().filter(|(_, &b)| b) {
                    let sigma = book
                        .witness_for_action(i, x)
                        .ok_or_else(|| missing(format!("player {i} action {x}")))?;
                    out.push(Certificate {
                        sigma: sigma.clone(),
                        players: vec![certify_action(game, sigma, i, x, tol)?],
                    });
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedRecord {
    pub lambda: f64,
    pub mesh: usize,
    pub rounds: usize,
    pub converged: bool,
    pub cloud: MixedProfileCloud,
}

/// Everything a `solve` run produced, with the input embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub tool_version: String,
    pub spec_hash: String,
    pub spec: SpecDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed: Option<MixedRecord>,
}

impl ResultBundle {
    pub fn to_json(&self) -> Result<String, IoError> {
        serde_json::to_string_pretty(self).map_err(|e| IoError::Schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Schema(format!("bundle: {e}")))
    }
}

/// Summary written by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub tool_version: String,
    pub spec_hash: String,
    pub survivors_hash: String,
    pub survivor_count: usize,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub containment: ContainmentReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intended_rate: Option<f64>,
}

/// One row per period: `t`, each player's action, outcome and posterior mean.
pub fn trace_csv(game: &GameSpec, trace: &LearningTrace) -> Result<String, IoError> {
    let n = game.n_players();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("action_{i}")));
    header.extend((0..n).map(|i| format!("outcome_{i}")));
    header.extend((0..n).map(|i| format!("theta_{i}")));
    w.write_record(&header)?;
    for (t, &p) in trace.profiles.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(game.action_values(p).iter().map(|v| v.to_string()));
        row.extend((0..n).map(|i| trace.outcome(t, i).to_string()));
        row.extend((0..n).map(|i| trace.posterior_mean(t, i).to_string()));
        w.write_record(&row)?;
    }
    finish_csv(w)
}

/// Reads the action columns of a trace CSV (as written by [`trace_csv`],
/// or any file with `action_<i>` columns) and snaps them to the grid.
pub fn read_trace_actions(game: &GameSpec, text: &str) -> Result<LearningTrace, IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let cols: Vec<usize> = (0..game.n_players())
        .map(|i| {
            let name = format!("action_{i}");
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IoError::Schema(format!("trace file lacks column {name}")))
        })
        .collect::<Result<_, _>>()?;
    let mut profiles = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = cols
            .iter()
            .map(|&c| {
                rec[c]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| IoError::Schema(format!("bad action value {:?}: {e}", &rec[c])))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        profiles.push(game.nearest_profile(&values));
    }
    Ok(LearningTrace::forced(game.n_players(), profiles))
}

/// Per-round solver summary.
pub fn rounds_csv(game: &GameSpec, rounds: &[RoundRecord]) -> Result<String, IoError> {
    let n = game.n_players();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["round".to_string(), "survivors".to_string()];
    for i in 0..n {
        header.push(format!("min_{i}"));
        header.push(format!("max_{i}"));
    }
    w.write_record(&header)?;
    for r in rounds {
        let mut row = vec![r.round.to_string(), r.survivors.to_string()];
        for i in 0..n {
            row.push(r.min_action[i].to_string());
            row.push(r.max_action[i].to_string());
        }
        w.write_record(&row)?;
    }
    finish_csv(w)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, IoError> {
    let bytes = w.into_inner().map_err(|e| IoError::Schema(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Schema(e.to_string()))
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| IoError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    readable(path)
}

/// Temporary files are created private; published outputs are not.
pub(crate) fn readable(path: &Path) -> Result<(), IoError> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(path, fs::Permissions::from_mode(0o644)).map_err(|e| IoError::io(path, e))?;
    }
    Ok(())
}
