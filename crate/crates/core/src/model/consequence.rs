use serde::{Deserialize, Serialize};

/// How a player's effort interacts with the rest of the profile in a
/// linear-Gaussian consequence model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interaction {
    /// `g = 1`: a single-agent returns-to-effort model.
    Unit,
    /// `g` is another player's action.
    Action { player: usize },
    /// `g = 1` when two other players act within `threshold` of each other.
    Close {
        first: usize,
        second: usize,
        threshold: f64,
    },
}

impl Interaction {
    /// Evaluates `g` on a vector of action values.
    pub fn eval(&self, values: &[f64]) -> f64 {
        match *self {
            Interaction::Unit => 1.0,
            Interaction::Action { player } => values[player],
            Interaction::Close {
                first,
                second,
                threshold,
            } => {
                if (values[first] - values[second]).abs() < threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Players other than the owner that `g` reads.
    pub fn players(&self) -> Vec<usize> {
        match *self {
            Interaction::Unit => vec![],
            Interaction::Action { player } => vec![player],
            Interaction::Close { first, second, .. } => vec![first, second],
        }
    }
}

/// Unit-variance Gaussian outcome with mean `theta * (ability + own * g)`.
///
/// The truth uses `(true_theta, true_ability)`; the player's model family uses
/// `ability` and a free `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLinear {
    pub true_theta: f64,
    pub true_ability: f64,
    pub ability: f64,
    pub interaction: Interaction,
}

impl GaussianLinear {
    /// Regressor multiplying `theta` in the subjective mean.
    #[inline]
    pub fn regressor(&self, own: f64, g: f64) -> f64 {
        self.ability + own * g
    }

    #[inline]
    pub fn true_mean(&self, own: f64, g: f64) -> f64 {
        self.true_theta * (self.true_ability + own * g)
    }

    /// KL divergence of the model at `theta` from the truth at one profile.
    #[inline]
    pub fn kl(&self, theta: f64, own: f64, g: f64) -> f64 {
        let d = theta * self.regressor(own, g) - self.true_mean(own, g);
        0.5 * d * d
    }

    /// Log density of outcome `y` under the model at `theta`.
    #[inline]
    pub fn log_density(&self, theta: f64, own: f64, g: f64, y: f64) -> f64 {
        let d = y - theta * self.regressor(own, g);
        -0.5 * d * d - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    pub fn correctly_specified(&self) -> bool {
        self.ability == self.true_ability
    }
}

/// Finite outcomes with explicit probability rows.
///
/// `truth[profile][y]` is the true kernel and `family[theta][profile][y]` the
/// model family, indexed by the player's parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularFinite {
    pub outcomes: Vec<f64>,
    pub truth: Vec<Vec<f64>>,
    pub family: Vec<Vec<Vec<f64>>>,
}

impl TabularFinite {
    pub fn outcome_index(&self, y: f64) -> Option<usize> {
        self.outcomes.iter().position(|&o| o == y)
    }

    /// `sum_y q ln(q / q_theta)` with `0 ln 0 = 0`; `None` if infinite.
    pub fn kl(&self, theta: usize, profile: usize) -> Option<f64> {
        let truth = &self.truth[profile];
        let model = &self.family[theta][profile];
        let mut total = 0.0;
        for (&q, &p) in truth.iter().zip(model) {
            if q > 0.0 {
                if p <= 0.0 {
                    return None;
                }
                total += q * (q / p).ln();
            }
        }
        Some(total.max(0.0))
    }
}

/// A player's consequence model: the true kernel together with the
/// parametric family the player fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConsequenceModel {
    GaussianLinear(GaussianLinear),
    TabularFinite(TabularFinite),
}
