use serde::{Deserialize, Serialize};

use super::ModelError;

/// Piecewise-linear marginal cost on `knots`, extended linearly past the last
/// knot. The cost is its exact integral from 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw", into = "TabulatedRaw")]
pub struct Tabulated {
    knots: Vec<f64>,
    marginal: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TabulatedRaw {
    knots: Vec<f64>,
    marginal: Vec<f64>,
}

impl PartialEq for Tabulated {
    fn eq(&self, other: &Self) -> bool {
        self.knots == other.knots && self.marginal == other.marginal
    }
}

impl TryFrom<TabulatedRaw> for Tabulated {
    type Error = ModelError;

    fn try_from(raw: TabulatedRaw) -> Result<Self, ModelError> {
        Tabulated::new(raw.knots, raw.marginal)
    }
}

impl From<Tabulated> for TabulatedRaw {
    fn from(t: Tabulated) -> Self {
        TabulatedRaw {
            knots: t.knots,
            marginal: t.marginal,
        }
    }
}

impl Tabulated {
    pub fn new(knots: Vec<f64>, marginal: Vec<f64>) -> Result<Self, ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidCost(m.to_string()));
        if knots.len() < 2 || knots.len() != marginal.len() {
            return bad("need at least two knots and one marginal value per knot");
        }
        if knots.iter().chain(&marginal).any(|v| !v.is_finite()) {
            return bad("non-finite knot or marginal value");
        }
        if knots[0] != 0.0 || marginal[0] != 0.0 {
            return bad("the first knot must be 0 with zero marginal cost");
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return bad("knots must be strictly increasing");
        }
        if marginal.windows(2).any(|w| w[1] <= w[0]) {
            return bad("marginal cost must be strictly increasing");
        }
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(0.0);
        for j in 1..knots.len() {
            let seg = 0.5 * (marginal[j - 1] + marginal[j]) * (knots[j] - knots[j - 1]);
            cumulative.push(cumulative[j - 1] + seg);
        }
        Ok(Self {
            knots,
            marginal,
            cumulative,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn marginal_values(&self) -> &[f64] {
        &self.marginal
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(j) => j.min(n - 2),
            Err(0) => 0,
            Err(j) => (j - 1).min(n - 2),
        }
    }

    fn slope(&self, j: usize) -> f64 {
        (self.marginal[j + 1] - self.marginal[j]) / (self.knots[j + 1] - self.knots[j])
    }

    pub fn marginal(&self, x: f64) -> f64 {
        let j = self.segment(x);
        self.marginal[j] + self.slope(j) * (x - self.knots[j])
    }

    pub fn cost(&self, x: f64) -> f64 {
        let j = self.segment(x);
        let dx = x - self.knots[j];
        let m0 = self.marginal[j];
        self.cumulative[j] + dx * (m0 + 0.5 * self.slope(j) * dx)
    }

    pub fn inverse_marginal(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let n = self.marginal.len();
        let j = match self.marginal.binary_search_by(|m| m.total_cmp(&z)) {
            Ok(j) => return self.knots[j],
            Err(j) => (j.max(1) - 1).min(n - 2),
        };
        self.knots[j] + (z - self.marginal[j]) / self.slope(j)
    }
}

/// Effort cost. `Quadratic { coef }` is `c(a) = coef * a^2 / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFn {
    Quadratic { coef: f64 },
    Tabulated(Tabulated),
}

impl CostFn {
    pub fn quadratic(coef: f64) -> Self {
        CostFn::Quadratic { coef }
    }

    pub fn tabulated(knots: Vec<f64>, marginal: Vec<f64>) -> Result<Self, ModelError> {
        Tabulated::new(knots, marginal).map(CostFn::Tabulated)
    }

    /// Samples a marginal-cost function on `count` evenly spaced knots over
    /// `[0, upper]`, shifted so that the marginal cost at zero vanishes.
    pub fn tabulate(marginal: impl Fn(f64) -> f64, upper: f64, count: usize) -> Result<Self, ModelError> {
        if count < 2 || upper <= 0.0 {
            return Err(ModelError::InvalidCost("need count >= 2 and upper > 0".into()));
        }
        let offset = marginal(0.0);
        let knots: Vec<f64> = (0..count)
            .map(|k| upper * k as f64 / (count - 1) as f64)
            .collect();
        let values = knots.iter().map(|&x| marginal(x) - offset).collect();
        Self::tabulated(knots, values)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            CostFn::Quadratic { coef } if !(coef.is_finite() && *coef > 0.0) => Err(
                ModelError::InvalidCost("quadratic coefficient must be positive".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn cost(&self, a: f64) -> f64 {
        match self {
            CostFn::Quadratic { coef } => 0.5 * coef * a * a,
            CostFn::Tabulated(t) => t.cost(a),
        }
    }

    pub fn marginal(&self, a: f64) -> f64 {
        match self {
            CostFn::Quadratic { coef } => coef * a,
            CostFn::Tabulated(t) => t.marginal(a),
        }
    }

    /// `(c')^{-1}(z)`, with every nonpositive `z` mapped to 0 for tabulated
    /// costs (whose domain starts at 0).
    pub fn inverse_marginal(&self, z: f64) -> f64 {
        match self {
            CostFn::Quadratic { coef } => z / coef,
            CostFn::Tabulated(t) => t.inverse_marginal(z),
        }
    }

    /// Smallest action the cost is defined for.
    pub fn domain_min(&self) -> f64 {
        match self {
            CostFn::Quadratic { .. } => f64::NEG_INFINITY,
            CostFn::Tabulated(_) => 0.0,
        }
    }
}

/// Payoff `pi(a^i, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffFn {
    /// `y - c(a^i)`.
    OutcomeMinusCost { cost: CostFn },
    /// `values[own action index][outcome index]` (finite outcomes only).
    Table { values: Vec<Vec<f64>> },
}

impl PayoffFn {
    pub fn outcome_minus_cost(cost: CostFn) -> Self {
        PayoffFn::OutcomeMinusCost { cost }
    }

    /// Payoff at an own action (index and value) and outcome (index and value).
    pub fn eval(&self, action: usize, action_value: f64, outcome: usize, y: f64) -> f64 {
        match self {
            PayoffFn::OutcomeMinusCost { cost } => y - cost.cost(action_value),
            PayoffFn::Table { values } => values[action][outcome],
        }
    }

    pub fn cost(&self) -> Option<&CostFn> {
        match self {
            PayoffFn::OutcomeMinusCost { cost } => Some(cost),
            PayoffFn::Table { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_cost() {
        let c = CostFn::quadratic(2.0);
        assert_eq!(c.cost(1.0), 1.0);
        assert_eq!(c.marginal(0.5), 1.0);
        assert_eq!(c.inverse_marginal(1.0), 0.5);
    }

    #[test]
    fn tabulated_matches_quadratic_exactly() {
        let c = CostFn::tabulate(|a| a, 3.0, 31).unwrap();
        for &x in &[0.0, 0.05, 0.5, 1.234, 2.999, 3.5] {
            assert!((c.cost(x) - 0.5 * x * x).abs() < 1e-12, "cost at {x}");
            assert!((c.marginal(x) - x).abs() < 1e-12);
            assert!((c.inverse_marginal(x) - x).abs() < 1e-12);
        }
        assert_eq!(c.inverse_marginal(-1.0), 0.0);
    }

    #[test]
    fn tabulated_subtracts_offset() {
        let c = CostFn::tabulate(|a| 1.0 + a * a, 2.0, 201).unwrap();
        assert_eq!(c.marginal(0.0), 0.0);
        assert!((c.marginal(1.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn tabulated_rejects_nonmonotone() {
        assert!(CostFn::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0]).is_err());
        assert!(CostFn::tabulated(vec![0.0, 1.0], vec![0.1, 1.0]).is_err());
    }

    #[test]
    fn tabulated_serde_roundtrip() {
        let c = CostFn::tabulate(|a| a * a + a, 2.0, 5).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: CostFn = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
        assert_eq!(back.cost(1.3), c.cost(1.3));
    }
}
