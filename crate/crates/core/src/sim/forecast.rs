use std::collections::BTreeMap;

use super::SimError;

/// Smoothed empirical forecast of opponents' play over the compact opponent
/// cells of one player.
///
/// At period `t` (with `t - 1` observations) the forecast is
/// `a0 / (a0 + t - 1) * prior + (t - 1) / (a0 + t - 1) * empirical`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastState {
    prior: Vec<f64>,
    prior_min: f64,
    alpha0: f64,
    counts: BTreeMap<usize, u64>,
    t: u64,
    features: Vec<Feature>,
}

/// A function of the opponent cell whose forecast mean is kept current in
/// constant time per observation.
#[derive(Debug, Clone, PartialEq)]
struct Feature {
    values: Vec<f64>,
    prior_mean: f64,
    observed_sum: f64,
}

impl ForecastState {
    pub fn new(prior: Vec<f64>, alpha0: f64) -> Result<Self, SimError> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(SimError::InvalidForecast("prior mass must be positive".into()));
        }
        if prior.is_empty() || prior.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(SimError::InvalidForecast("prior must have full support".into()));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SimError::InvalidForecast(format!("prior sums to {total}")));
        }
        Ok(Self {
            prior_min: prior.iter().copied().fold(f64::INFINITY, f64::min),
            prior,
            alpha0,
            counts: BTreeMap::new(),
            t: 1,
            features: Vec::new(),
        })
    }

    pub fn uniform(cells: usize, alpha0: f64) -> Result<Self, SimError> {
        Self::new(vec![1.0 / cells as f64; cells], alpha0)
    }

    /// Starts tracking the forecast mean of `values` (one per cell); returns
    /// its handle for [`ForecastState::feature_mean`].
    pub fn track(&mut self, values: Vec<f64>) -> usize {
        assert_eq!(values.len(), self.prior.len(), "one value per opponent cell");
        let prior_mean = self.prior.iter().zip(&values).map(|(w, v)| w * v).sum();
        let observed_sum = self
            .counts
            .iter()
            .map(|(&c, &n)| n as f64 * values[c])
            .sum();
        self.features.push(Feature {
            values,
            prior_mean,
            observed_sum,
        });
        self.features.len() - 1
    }

    /// Current period (1 before any observation).
    pub fn period(&self) -> u64 {
        self.t
    }

    pub fn observations(&self) -> u64 {
        self.t - 1
    }

    pub fn cells(&self) -> usize {
        self.prior.len()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// Weight currently placed on the prior.
    pub fn prior_weight(&self) -> f64 {
        self.alpha0 / (self.alpha0 + self.observations() as f64)
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    /// Records one observed opponent cell and advances the period.
    pub fn update(&mut self, cell: usize) {
        *self.counts.entry(cell).or_insert(0) += 1;
        for f in self.features.iter_mut() {
            f.observed_sum += f.values[cell];
        }
        self.t += 1;
    }

    pub fn weight(&self, cell: usize) -> f64 {
        let pw = self.prior_weight();
        let n = self.observations();
        let emp = if n == 0 {
            0.0
        } else {
            *self.counts.get(&cell).unwrap_or(&0) as f64 / n as f64
        };
        pw * self.prior[cell] + (1.0 - pw) * emp
    }

    /// Dense forecast vector.
    pub fn weights(&self) -> Vec<f64> {
        let pw = self.prior_weight();
        let mut out: Vec<f64> = self.prior.iter().map(|w| pw * w).collect();
        let n = self.observations();
        if n > 0 {
            let scale = (1.0 - pw) / n as f64;
            for (&c, &k) in &self.counts {
                out[c] += scale * k as f64;
            }
        }
        out
    }

    /// Forecast as (cell, weight) pairs over every cell.
    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.weights().into_iter().enumerate().collect()
    }

    pub fn feature_mean(&self, handle: usize) -> f64 {
        let f = &self.features[handle];
        let pw = self.prior_weight();
        let n = self.observations();
        let emp = if n == 0 { 0.0 } else { f.observed_sum / n as f64 };
        pw * f.prior_mean + (1.0 - pw) * emp
    }

    /// Lower bound on every cell's weight: `a0 * min prior / (a0 + t - 1)`.
    pub fn support_floor(&self) -> f64 {
        self.prior_weight() * self.prior_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_period_is_prior() {
        let f = ForecastState::new(vec![0.1, 0.2, 0.7], 2.0).unwrap();
        assert_eq!(f.weights(), vec![0.1, 0.2, 0.7]);
        assert_eq!(f.period(), 1);
    }

    #[test]
    fn two_observations_uniform_prior() {
        let mut f = ForecastState::uniform(4, 1.0).unwrap();
        f.update(2);
        f.update(2);
        assert!((f.weight(2) - 0.75).abs() < 1e-15);
        assert!((f.weight(0) - 1.0 / 12.0).abs() < 1e-15);
        let total: f64 = f.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(f.weights().iter().all(|&w| w >= f.support_floor() - 1e-18));
    }

    #[test]
    fn tracked_feature_matches_dense_mean() {
        let mut f = ForecastState::new(vec![0.5, 0.25, 0.25], 3.0).unwrap();
        f.update(1);
        let h = f.track(vec![1.0, 2.0, 4.0]);
        f.update(2);
        f.update(2);
        let dense: f64 = f.weights().iter().zip([1.0, 2.0, 4.0]).map(|(w, v)| w * v).sum();
        assert!((f.feature_mean(h) - dense).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_priors() {
        assert!(ForecastState::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(ForecastState::new(vec![0.5, 0.5], 0.0).is_err());
    }
}
