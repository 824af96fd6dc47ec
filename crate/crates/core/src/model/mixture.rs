use serde::{Deserialize, Serialize};

use super::grid::ProfileGrid;
use super::ModelError;

const SUM_TOL: f64 = 1e-12;

fn check_weights(weights: &[f64]) -> Result<(), ModelError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(ModelError::InvalidWeights(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(ModelError::InvalidWeights(format!(
            "weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// A distribution over action profiles (flat profile indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMixture {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl ProfileMixture {
    pub fn new(support: Vec<usize>, weights: Vec<f64>, grid_len: usize) -> Result<Self, ModelError> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(ModelError::InvalidWeights(
                "support and weights must be nonempty and of equal length".into(),
            ));
        }
        check_weights(&weights)?;
        let mut seen = std::collections::HashSet::with_capacity(support.len());
        for &p in &support {
            if p >= grid_len {
                return Err(ModelError::SupportOutOfRange {
                    index: p,
                    len: grid_len,
                });
            }
            if !seen.insert(p) {
                return Err(ModelError::DuplicateSupport(p));
            }
        }
        Ok(Self { support, weights })
    }

    /// Builds a mixture from (profile, weight) pairs, merging repeated
    /// profiles and dropping zero weights.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (usize, f64)>,
        grid_len: usize,
    ) -> Result<Self, ModelError> {
        let mut merged = std::collections::BTreeMap::new();
        for (p, w) in pairs {
            *merged.entry(p).or_insert(0.0) += w;
        }
        let (support, weights): (Vec<_>, Vec<_>) = merged.into_iter().filter(|(_, w)| *w > 0.0).unzip();
        Self::new(support, weights, grid_len)
    }

    pub fn point(profile: usize) -> Self {
        Self {
            support: vec![profile],
            weights: vec![1.0],
        }
    }

    pub fn uniform(support: Vec<usize>, grid_len: usize) -> Result<Self, ModelError> {
        let n = support.len();
        Self::new(support, vec![1.0 / n as f64; n], grid_len)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn weight_of(&self, profile: usize) -> f64 {
        self.support
            .iter()
            .position(|&p| p == profile)
            .map_or(0.0, |k| self.weights[k])
    }

    /// Pushforward onto the opponents of `player`.
    pub fn opponent_marginal(&self, grid: &ProfileGrid, player: usize) -> OpponentMarginal {
        OpponentMarginal::from_pairs(
            self.iter().map(|(p, w)| (grid.opp_index(p, player), w)),
        )
    }

    /// Distribution of `player`'s own action index.
    pub fn own_marginal(&self, grid: &ProfileGrid, player: usize) -> Vec<f64> {
        let mut out = vec![0.0; grid.dims()[player]];
        for (p, w) in self.iter() {
            out[grid.coord(p, player)] += w;
        }
        out
    }
}

/// Distribution over the compact opponent index space of one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentMarginal {
    cells: Vec<usize>,
    weights: Vec<f64>,
}

impl OpponentMarginal {
    /// Merges repeated cells; cells come out sorted.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut merged = std::collections::BTreeMap::new();
        for (c, w) in pairs {
            *merged.entry(c).or_insert(0.0) += w;
        }
        let (cells, weights) = merged.into_iter().unzip();
        Self { cells, weights }
    }

    /// Marginal of a one-player game: the single empty opponent cell.
    pub fn trivial() -> Self {
        Self {
            cells: vec![0],
            weights: vec![1.0],
        }
    }

    pub fn validate(&self, opp_len: usize) -> Result<(), ModelError> {
        check_weights(&self.weights)?;
        match self.cells.iter().find(|&&c| c >= opp_len) {
            Some(&c) => Err(ModelError::SupportOutOfRange {
                index: c,
                len: opp_len,
            }),
            None => Ok(()),
        }
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cells.iter().copied().zip(self.weights.iter().copied())
    }
}

/// A belief over one player's parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBelief {
    weights: Vec<f64>,
}

impl ParamBelief {
    pub fn new(weights: Vec<f64>) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(ModelError::InvalidWeights("empty belief".into()));
        }
        check_weights(&weights)?;
        Ok(Self { weights })
    }

    pub fn point(len: usize, index: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        Self { weights }
    }

    /// Uniform over the listed parameter indices.
    pub fn uniform_over(len: usize, indices: &[usize]) -> Self {
        let mut weights = vec![0.0; len];
        let w = 1.0 / indices.len() as f64;
        for &i in indices {
            weights[i] = w;
        }
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices carrying positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&k| self.weights[k] > 0.0).collect()
    }

    pub fn mean(&self, points: &[f64]) -> f64 {
        self.weights.iter().zip(points).map(|(w, t)| w * t).sum()
    }

    /// `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_validation() {
        assert!(ProfileMixture::new(vec![0, 1], vec![0.5, 0.5], 4).is_ok());
        assert!(ProfileMixture::new(vec![0, 0], vec![0.5, 0.5], 4).is_err());
        assert!(ProfileMixture::new(vec![0, 9], vec![0.5, 0.5], 4).is_err());
        assert!(ProfileMixture::new(vec![0, 1], vec![0.5, 0.6], 4).is_err());
        assert!(ProfileMixture::new(vec![0, 1], vec![1.5, -0.5], 4).is_err());
        let m = ProfileMixture::from_pairs([(3, 0.25), (1, 0.5), (3, 0.25)], 4).unwrap();
        assert_eq!(m.support(), &[1, 3]);
        assert_eq!(m.weight_of(3), 0.5);
    }

    #[test]
    fn marginals() {
        let grid = ProfileGrid::new(vec![2, 3]);
        let m = ProfileMixture::from_pairs([(grid.encode(&[0, 2]), 0.25), (grid.encode(&[1, 2]), 0.75)], 6).unwrap();
        let opp = m.opponent_marginal(&grid, 0);
        assert_eq!(opp.cells(), &[2]);
        assert_eq!(opp.weights(), &[1.0]);
        assert_eq!(m.own_marginal(&grid, 0), vec![0.25, 0.75]);
    }

    #[test]
    fn belief_helpers() {
        let b = ParamBelief::uniform_over(4, &[1, 3]);
        assert_eq!(b.support(), vec![1, 3]);
        assert_eq!(b.mean(&[0.0, 1.0, 2.0, 3.0]), 2.0);
        assert!(ParamBelief::new(vec![0.2, 0.2]).is_err());
    }
}
