use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::SolverError;

/// Hard cap on enumerated mixtures for one operator application.
pub const MAX_CANDIDATES: u128 = 20_000_000;
/// Largest support of a sampled Dirichlet mixture.
pub const DIRICHLET_MAX_SUPPORT: usize = 8;

/// How the existential search over witness mixtures is carried out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSearchPolicy {
    /// Every mixture with weights in multiples of `1/(mesh-1)` on at most
    /// `max_support` profiles.
    SimplexGrid { mesh: usize, max_support: usize },
    /// Point masses plus `count` seeded draws from a flat Dirichlet on random
    /// small supports.
    DirichletSample { count: usize, seed: u64 },
    /// Linear-Gaussian games only: point masses plus adaptively refined
    /// two-point segments between extreme profiles.
    StructuredMoments,
    /// Exact margin-maximizing linear program per profile; requires
    /// best-fitting parameters that do not depend on the mixture.
    LinearProgram,
}

impl SigmaSearchPolicy {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidPolicy(m.to_string()));
        match *self {
            SigmaSearchPolicy::SimplexGrid { mesh, max_support } => {
                if mesh < 2 {
                    return bad("mesh must be at least 2");
                }
                if max_support < 1 {
                    return bad("max_support must be at least 1");
                }
            }
            SigmaSearchPolicy::DirichletSample { count, .. } if count < 1 => {
                return bad("count must be at least 1");
            }
            _ => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            SigmaSearchPolicy::SimplexGrid { .. } => "simplex_grid",
            SigmaSearchPolicy::DirichletSample { .. } => "dirichlet_sample",
            SigmaSearchPolicy::StructuredMoments => "structured_moments",
            SigmaSearchPolicy::LinearProgram => "linear_program",
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// Number of simplex-grid mixtures over `n` profiles.
pub fn simplex_candidate_count(n: usize, mesh: usize, max_support: usize) -> u128 {
    let units = mesh - 1;
    (1..=max_support.min(n).min(units.max(1)))
        .map(|j| binomial(n, j).saturating_mul(binomial(units - 1, j - 1)))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// All compositions of `total` into exactly `parts` positive integers.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            rec(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts >= 1 && total >= parts {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// All `k`-subsets of `items`, in lexicographic order of positions.
pub(crate) fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut j = k;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if idx[j] < n - k + j {
                idx[j] += 1;
                for m in j + 1..k {
                    idx[m] = idx[m - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Seeded Dirichlet(1) draws on random supports drawn from `profiles`.
pub(crate) fn dirichlet_draws(profiles: &[usize], count: usize, seed: u64) -> Vec<Vec<(usize, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k_max = profiles.len().min(DIRICHLET_MAX_SUPPORT);
            let k = rng.random_range(1..=k_max);
            let picked = rand::seq::index::sample(&mut rng, profiles.len(), k);
            let mut support: Vec<usize> = picked.iter().map(|i| profiles[i]).collect();
            support.sort_unstable();
            let raw: Vec<f64> = (0..k).map(|_| exp1(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            support.into_iter().zip(raw.into_iter().map(|w| w / total)).collect()
        })
        .collect()
}

fn exp1<R: Rng>(rng: &mut R) -> f64 {
    let v: f64 = Exp1.sample(rng);
    // Avoid exact zeros so every drawn profile stays in the support.
    v.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(10, 3).len() as u128, binomial(9, 2));
        assert!(compositions(2, 3).is_empty());
    }

    #[test]
    fn subset_enumeration() {
        let s = subsets(&[5, 6, 7, 8], 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![5, 6]);
        assert_eq!(s[5], vec![7, 8]);
    }

    #[test]
    fn candidate_count_matches_enumeration() {
        let items: Vec<usize> = (0..6).collect();
        let mut total = 0u128;
        for j in 1..=3 {
            total += (subsets(&items, j).len() * compositions(4, j).len()) as u128;
        }
        assert_eq!(simplex_candidate_count(6, 5, 3), total);
    }

    #[test]
    fn dirichlet_is_seeded() {
        let p: Vec<usize> = (0..20).collect();
        let a = dirichlet_draws(&p, 10, 7);
        let b = dirichlet_draws(&p, 10, 7);
        assert_eq!(a, b);
        for d in &a {
            let s: f64 = d.iter().map(|x| x.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(d.len() <= DIRICHLET_MAX_SUPPORT);
        }
    }

    #[test]
    fn policy_validation() {
        assert!(SigmaSearchPolicy::SimplexGrid { mesh: 1, max_support: 2 }.validate().is_err());
        assert!(SigmaSearchPolicy::DirichletSample { count: 0, seed: 1 }.validate().is_err());
        assert!(SigmaSearchPolicy::StructuredMoments.validate().is_ok());
    }
}
