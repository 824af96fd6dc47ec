//! Independent reference computations and game builders shared by the
//! integration tests. Nothing here calls into the solver or the analytic
//! module; the oracles only use the public model types to build games.
#![allow(dead_code)]

use bnlab::model::{
    ActionGrid, ConsequenceModel, GameSpec, ParamGrid, PayoffFn, PlayerSpec, TabularFinite,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain bisection for a sign change on `[lo, hi]`, run to machine precision.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Positive root of `a^2 + (alpha - theta) a - theta * alpha_true = 0`.
pub fn effort_fixed_point(theta: f64, alpha_true: f64, alpha: f64) -> f64 {
    bisect(|a| a * a + (alpha - theta) * a - theta * alpha_true, 0.0, 10.0)
}

/// Marginal cost of the underconfident figure instance, before tabulation.
pub fn under_figure_marginal(a: f64) -> f64 {
    1.5 * (1.0 - (-10.0 * a).exp()) + 0.5 * (10.0 * (a - 1.0)).exp().ln_1p()
}

/// Marginal cost of the overconfident figure instance, before tabulation.
pub fn over_figure_marginal(a: f64) -> f64 {
    0.45 / (1.0 + (-25.0 * (a - 0.2)).exp()) + (5.0 * (a - 1.5)).exp().ln_1p() / 5.0
}

/// Inverse of an increasing marginal cost by bisection on `[0, 10]`.
pub fn invert(mc: impl Fn(f64) -> f64, z: f64) -> f64 {
    let base = mc(0.0);
    bisect(|a| mc(a) - base - z, 0.0, 10.0)
}

/// The 2-cycle `(lo, hi)` of `T(a) = (c')^{-1}(theta*(alpha* + a)/(alpha + a))`
/// with `lo < hi`, located as the smallest root of `T(T(a)) - a` by a scan
/// followed by bisection.
pub fn two_cycle(mc: impl Fn(f64) -> f64 + Copy, theta: f64, alpha_true: f64, alpha: f64) -> (f64, f64) {
    let t = |a: f64| invert(mc, theta * (alpha_true + a) / (alpha + a));
    let g = |a: f64| t(t(a)) - a;
    let n = 4000;
    let top = t(0.0);
    let mut prev = g(0.0);
    for k in 1..=n {
        let a = top * k as f64 / n as f64;
        let cur = g(a);
        if prev > 0.0 && cur <= 0.0 {
            let lo = bisect(g, top * (k - 1) as f64 / n as f64, a);
            return (lo, t(lo));
        }
        prev = cur;
    }
    panic!("no 2-cycle found");
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * k as f64);
    }
    s * h / 3.0
}

/// `KL(N(m_true, 1) || N(m_model, 1))` by quadrature of the density ratio.
pub fn gaussian_kl_quadrature(m_true: f64, m_model: f64) -> f64 {
    let phi = |y: f64, m: f64| (-(y - m) * (y - m) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let log_ratio = |y: f64| ((y - m_model) * (y - m_model) - (y - m_true) * (y - m_true)) / 2.0;
    simpson(|y| phi(y, m_true) * log_ratio(y), m_true - 40.0, m_true + 40.0, 100_000)
}

/// Hausdorff distance between two intervals.
pub fn hausdorff(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn random_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut row: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = row[..len - 1].iter().sum();
    row[len - 1] = 1.0 - head;
    row
}

/// Shape of a random tabular game.
#[derive(Debug, Clone, Copy)]
pub struct TabularShape {
    pub players: usize,
    pub max_actions: usize,
    pub params: usize,
    pub outcomes: usize,
    /// The truth is one of the family's members and the others differ from it
    /// at every profile.
    pub correct: bool,
}

/// A random tabular game. Outcomes are `0, 1, ...`; payoffs are uniform on
/// `[0, 1]` per (own action, outcome).
pub fn random_tabular_game(seed: u64, shape: TabularShape) -> GameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..shape.players)
        .map(|_| rng.random_range(2..=shape.max_actions))
        .collect();
    let n_profiles: usize = dims.iter().product();
    let outcomes: Vec<f64> = (0..shape.outcomes).map(|k| k as f64).collect();
    let players = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let truth: Vec<Vec<f64>> = (0..n_profiles).map(|_| random_row(&mut rng, shape.outcomes)).collect();
            let star = rng.random_range(0..shape.params);
            let family = (0..shape.params)
                .map(|k| {
                    if shape.correct && k == star {
                        truth.clone()
                    } else {
                        (0..n_profiles).map(|_| random_row(&mut rng, shape.outcomes)).collect()
                    }
                })
                .collect();
            let values = (0..d)
                .map(|_| (0..shape.outcomes).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect();
            PlayerSpec {
                name: format!("p{i}"),
                actions: ActionGrid::new((0..d).map(|x| x as f64).collect()).unwrap(),
                params: ParamGrid::new((0..shape.params).map(|k| k as f64).collect(), 0.0, shape.params as f64)
                    .unwrap(),
                model: ConsequenceModel::TabularFinite(TabularFinite {
                    outcomes: outcomes.clone(),
                    truth,
                    family,
                }),
                payoff: PayoffFn::Table { values },
            }
        })
        .collect();
    GameSpec::new(players).unwrap()
}

/// True expected payoff of player `i` at a profile of action indices, computed
/// straight from the tables.
pub fn true_payoff(game: &GameSpec, i: usize, coords: &[usize]) -> f64 {
    let spec = &game.players()[i];
    let (ConsequenceModel::TabularFinite(t), PayoffFn::Table { values }) = (&spec.model, &spec.payoff) else {
        panic!("tabular game expected");
    };
    let p = game.grid().encode(coords);
    t.truth[p].iter().zip(&values[coords[i]]).map(|(q, v)| q * v).sum()
}

/// Solves a square linear system by Gaussian elimination with partial
/// pivoting; `None` if (numerically) singular.
fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|k| rhs[k] / m[k][k]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Whether `{p in simplex : rows[r] . p >= -slack for all r}` is nonempty,
/// by enumerating the vertices of the polytope.
pub fn polytope_feasible(rows: &[Vec<f64>], dim: usize, slack: f64) -> bool {
    // Constraint list: p_j >= 0 as unit rows, then the given rows.
    let mut cons: Vec<Vec<f64>> = (0..dim)
        .map(|j| (0..dim).map(|c| if c == j { 1.0 } else { 0.0 }).collect())
        .collect();
    cons.extend(rows.iter().cloned());
    let ok = |p: &[f64]| {
        p.iter().all(|&x| x >= -1e-12)
            && rows.iter().all(|r| r.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() >= -slack)
    };
    for active in subsets(cons.len(), dim - 1) {
        let mut m: Vec<Vec<f64>> = active.iter().map(|&k| cons[k].clone()).collect();
        let mut rhs = vec![0.0; dim - 1];
        m.push(vec![1.0; dim]);
        rhs.push(1.0);
        if let Some(p) = solve(m, rhs) {
            if ok(&p) {
                return true;
            }
        }
    }
    false
}

/// Iterated elimination of never-best responses in a two-player game with
/// known true payoffs: an action survives while some belief over the
/// opponent's surviving actions makes it a best response among all own
/// actions. Returns the surviving action indices per player.
pub fn bp_oracle_two_player(game: &GameSpec, tol: f64) -> [Vec<usize>; 2] {
    let dims = game.grid().dims().to_vec();
    assert_eq!(dims.len(), 2);
    let mut alive: [Vec<usize>; 2] = [(0..dims[0]).collect(), (0..dims[1]).collect()];
    loop {
        let mut next = alive.clone();
        for i in 0..2 {
            let j = 1 - i;
            let coords = |own: usize, opp: usize| if i == 0 { [own, opp] } else { [opp, own] };
            next[i] = alive[i]
                .iter()
                .copied()
                .filter(|&x| {
                    let rows: Vec<Vec<f64>> = (0..dims[i])
                        .filter(|&y| y != x)
                        .map(|y| {
                            alive[j]
                                .iter()
                                .map(|&o| true_payoff(game, i, &coords(x, o)) - true_payoff(game, i, &coords(y, o)))
                                .collect()
                        })
                        .collect();
                    polytope_feasible(&rows, alive[j].len(), tol)
                })
                .collect();
        }
        if next == alive {
            return alive;
        }
        alive = next;
    }
}

/// Two players with two actions each and binary outcomes; play `(1, 1)` is
/// the unique strict equilibrium and each player fits a one-parameter scaled
/// model over three points.
pub fn strict_equilibrium_game() -> GameSpec {
    let grid = bnlab::model::ProfileGrid::new(vec![2, 2]);
    let rows = |f: &dyn Fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
        (0..4)
            .map(|p| {
                let c = grid.decode(p);
                let q = f(c[0] as f64, c[1] as f64);
                vec![1.0 - q, q]
            })
            .collect()
    };
    let thetas = [0.5, 0.7, 0.9];
    let player = |name: &str, truth: Vec<Vec<f64>>, family: Vec<Vec<Vec<f64>>>, cost: f64| PlayerSpec {
        name: name.into(),
        actions: ActionGrid::new(vec![0.0, 1.0]).unwrap(),
        params: ParamGrid::new(thetas.to_vec(), 0.0, 1.0).unwrap(),
        model: ConsequenceModel::TabularFinite(TabularFinite {
            outcomes: vec![0.0, 1.0],
            truth,
            family,
        }),
        payoff: PayoffFn::Table {
            values: vec![vec![0.0, 1.0], vec![-cost, 1.0 - cost]],
        },
    };
    let p0 = player(
        "row",
        rows(&|a0, _| 0.3 + 0.4 * a0),
        thetas.iter().map(|&t| rows(&|a0, _| t * (0.5 + 0.5 * a0))).collect(),
        0.2,
    );
    let p1 = player(
        "col",
        rows(&|a0, a1| 0.2 + 0.5 * a1 * a0),
        thetas.iter().map(|&t| rows(&|a0, a1| t * (0.3 + 0.6 * a1 * a0))).collect(),
        0.15,
    );
    GameSpec::new(vec![p0, p1]).unwrap()
}
