use crate::model::{log_likelihood, GameSpec};

use super::SimError;

/// Log-weights below the maximum by more than this are treated as zero
/// when normalizing (their mass is below `e^-60`).
const NEGLIGIBLE: f64 = 60.0;

/// Posterior over one player's parameter grid, kept as log-weights shifted so
/// the largest is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    log_w: Vec<f64>,
}

impl PosteriorState {
    pub fn new(prior: &[f64]) -> Result<Self, SimError> {
        if prior.is_empty() || prior.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(SimError::InvalidConfig("parameter prior must have full support".into()));
        }
        let mut s = Self {
            log_w: prior.iter().map(|w| w.ln()).collect(),
        };
        s.shift();
        Ok(s)
    }

    pub fn uniform(n: usize) -> Self {
        Self { log_w: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.log_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_w.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    fn shift(&mut self) -> bool {
        let top = self.log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return false;
        }
        for w in self.log_w.iter_mut() {
            *w -= top;
        }
        true
    }

    /// Adds `loglik(k)` to every log-weight and re-centres.
    pub fn update(&mut self, player: usize, loglik: impl Fn(usize) -> f64) -> Result<(), SimError> {
        for (k, w) in self.log_w.iter_mut().enumerate() {
            *w += loglik(k);
        }
        if self.shift() {
            Ok(())
        } else {
            Err(SimError::DegenerateLikelihood { player })
        }
    }

    /// Normalized weights.
    pub fn weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = self
            .log_w
            .iter()
            .map(|&w| if w < -NEGLIGIBLE { 0.0 } else { w.exp() })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|r| r / total).collect()
    }

    pub fn mean(&self, points: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&w, &p) in self.log_w.iter().zip(points) {
            if w >= -NEGLIGIBLE {
                let e = w.exp();
                num += e * p;
                den += e;
            }
        }
        num / den
    }

    /// `ln mu(E)` for the indices selected by `in_set`, computed exactly by
    /// log-sum-exp.
    pub fn log_mass(&self, in_set: impl Fn(usize) -> bool) -> f64 {
        let lse = |it: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = it.collect();
            let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return f64::NEG_INFINITY;
            }
            top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
        };
        let all = lse(&mut self.log_w.iter().copied());
        let sel = lse(&mut self.log_w.iter().enumerate().filter(|(k, _)| in_set(*k)).map(|(_, &w)| w));
        sel - all
    }
}

/// Bayes update of `player`'s posterior after observing `y` at `profile`.
pub fn posterior_update(
    game: &GameSpec,
    state: &mut PosteriorState,
    player: usize,
    profile: usize,
    y: f64,
) -> Result<(), SimError> {
    let n = game.player(player)?.params.len();
    let ll: Vec<f64> = (0..n)
        .map(|k| log_likelihood(game, player, k, profile, y))
        .collect::<Result<_, _>>()?;
    state.update(player, |k| ll[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_likelihood_keeps_odds() {
        let mut s = PosteriorState::new(&[0.2, 0.8]).unwrap();
        let before = s.weights();
        s.update(0, |_| -3.7).unwrap();
        let after = s.weights();
        assert!((before[0] - after[0]).abs() < 1e-15);
    }

    #[test]
    fn degenerate_likelihood() {
        let mut s = PosteriorState::uniform(3);
        assert!(matches!(
            s.update(1, |_| f64::NEG_INFINITY),
            Err(SimError::DegenerateLikelihood { player: 1 })
        ));
    }

    #[test]
    fn log_mass_matches_weights() {
        let mut s = PosteriorState::uniform(4);
        s.update(0, |k| -(k as f64)).unwrap();
        let w = s.weights();
        let lm = s.log_mass(|k| k >= 2);
        assert!((lm.exp() - (w[2] + w[3])).abs() < 1e-14);
    }
}
