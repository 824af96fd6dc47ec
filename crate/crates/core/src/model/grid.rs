use serde::{Deserialize, Serialize};

use super::ModelError;

/// Ordered action points for one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionGrid {
    points: Vec<f64>,
}

fn check_increasing(points: &[f64], what: &'static str) -> Result<(), ModelError> {
    if points.is_empty() {
        return Err(ModelError::EmptyGrid(what));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(ModelError::NonFiniteGrid(what));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::NotIncreasing(what));
    }
    Ok(())
}

fn uniform_points(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let step = (max - min) / (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { max } else { min + step * k as f64 })
        .collect()
}

/// Index of the grid point closest to `x` in an increasing slice.
pub(crate) fn nearest_index(points: &[f64], x: f64) -> usize {
    match points.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i == points.len() => points.len() - 1,
        Err(i) => {
            if x - points[i - 1] <= points[i] - x {
                i - 1
            } else {
                i
            }
        }
    }
}

impl ActionGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, ModelError> {
        check_increasing(&points, "action grid")?;
        Ok(Self { points })
    }

    /// `count` evenly spaced points on `[min, max]`.
    pub fn uniform(min: f64, max: f64, count: usize) -> Result<Self, ModelError> {
        if count == 0 {
            return Err(ModelError::EmptyGrid("action grid"));
        }
        if count > 1 && max <= min {
            return Err(ModelError::NotIncreasing("action grid"));
        }
        Self::new(uniform_points(min, max, count))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn value(&self, index: usize) -> f64 {
        self.points[index]
    }

    pub fn nearest(&self, x: f64) -> usize {
        nearest_index(&self.points, x)
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

/// Parameter points for one player's model family, with the bounds of the
/// parameter space they discretize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    points: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl ParamGrid {
    pub fn new(points: Vec<f64>, lo: f64, hi: f64) -> Result<Self, ModelError> {
        check_increasing(&points, "parameter grid")?;
        if points[0] < lo || points[points.len() - 1] > hi {
            return Err(ModelError::ParamOutOfBounds);
        }
        Ok(Self { points, lo, hi })
    }

    pub fn uniform(min: f64, max: f64, count: usize) -> Result<Self, ModelError> {
        if count == 0 {
            return Err(ModelError::EmptyGrid("parameter grid"));
        }
        if count > 1 && max <= min {
            return Err(ModelError::NotIncreasing("parameter grid"));
        }
        Self::new(uniform_points(min, max, count), min, max)
    }

    /// Grid with a single point (a known parameter).
    pub fn single(theta: f64) -> Self {
        Self {
            points: vec![theta],
            lo: theta,
            hi: theta,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn value(&self, index: usize) -> f64 {
        self.points[index]
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn nearest(&self, x: f64) -> usize {
        nearest_index(&self.points, x)
    }
}

/// Flat indexing of the joint action grid. Player 0 is the slowest-moving
/// coordinate.
///
/// Two index spaces are used: the profile index over the full grid, and the
/// compact opponent index over `A^{-i}` (the other players' coordinates in the
/// same order with player `i` removed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileGrid {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl ProfileGrid {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for p in (0..dims.len().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * dims[p + 1];
        }
        let len = dims.iter().product();
        Self { dims, strides, len }
    }

    pub fn players(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of profiles.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.strides)
            .map(|(c, s)| c * s)
            .sum()
    }

    pub fn decode(&self, profile: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|p| self.coord(profile, p)).collect()
    }

    pub fn coord(&self, profile: usize, player: usize) -> usize {
        (profile / self.strides[player]) % self.dims[player]
    }

    /// Same profile with `player`'s coordinate replaced.
    pub fn with_coord(&self, profile: usize, player: usize, own: usize) -> usize {
        profile - self.coord(profile, player) * self.strides[player] + own * self.strides[player]
    }

    /// Number of opponent cells for `player`.
    pub fn opp_len(&self, player: usize) -> usize {
        self.len / self.dims[player]
    }

    /// Compact opponent index of a profile, seen from `player`.
    pub fn opp_index(&self, profile: usize, player: usize) -> usize {
        let mut idx = 0;
        for p in 0..self.dims.len() {
            if p != player {
                idx = idx * self.dims[p] + self.coord(profile, p);
            }
        }
        idx
    }

    /// Profile obtained by combining an opponent cell with `player`'s own action.
    pub fn join(&self, player: usize, own: usize, opp: usize) -> usize {
        let mut rest = opp;
        let mut profile = 0;
        for p in (0..self.dims.len()).rev() {
            let c = if p == player {
                own
            } else {
                let c = rest % self.dims[p];
                rest /= self.dims[p];
                c
            };
            profile += c * self.strides[p];
        }
        profile
    }
}
