mod common;

use bnlab::analytic::{effort_game_on, team_game_on, EffortExample, TeamExample};
use bnlab::model::{
    best_response_set, expected_kl, expected_utility, kl_minimizer_set, kl_point, log_likelihood,
    ActionGrid, ConsequenceModel, GameSpec, ModelError, OpponentMarginal, ParamBelief, ParamGrid,
    PayoffFn, PlayerSpec, ProfileMixture, TabularFinite,
};

const TOL: f64 = 1e-9;

fn effort(true_ability: f64, ability: f64, actions: Vec<f64>, params: ParamGrid) -> GameSpec {
    let ex = EffortExample::quadratic(1.0, true_ability, ability).unwrap();
    effort_game_on(&ex, ActionGrid::new(actions).unwrap(), params).unwrap()
}

fn fine_params() -> ParamGrid {
    ParamGrid::uniform(0.0, 2.0, 2001).unwrap()
}

#[test]
fn gaussian_kl_closed_form_at_a_known_point() {
    let game = effort(1.0, 2.0, vec![0.0, 1.0, 2.0], ParamGrid::new(vec![0.5, 1.0], 0.0, 2.0).unwrap());
    let k = kl_point(&game, 0, 0, 1).unwrap();
    assert!((k - 0.125).abs() < 1e-15, "{k}");
}

#[test]
fn gaussian_kl_matches_quadrature() {
    let params = ParamGrid::new(vec![0.3, 0.5, 1.0, 1.7], 0.0, 2.0).unwrap();
    let actions = vec![0.0, 0.4, 1.0, 2.5];
    for (true_ability, ability) in [(1.0, 2.0), (1.0, 0.5), (1.5, 1.5)] {
        let game = effort(true_ability, ability, actions.clone(), params.clone());
        for (k, &theta) in params.points().iter().enumerate() {
            for (p, &a) in actions.iter().enumerate() {
                let closed = kl_point(&game, 0, k, p).unwrap();
                let quad = common::gaussian_kl_quadrature((true_ability + a) * 1.0, (ability + a) * theta);
                assert!((closed - quad).abs() < 1e-8, "theta {theta} a {a}: {closed} vs {quad}");
            }
        }
    }
}

#[test]
fn correct_specification_has_zero_kl_at_the_truth() {
    let game = effort(1.0, 1.0, vec![0.0, 0.7, 2.0], ParamGrid::new(vec![0.5, 1.0, 1.5], 0.0, 2.0).unwrap());
    for p in 0..3 {
        assert_eq!(kl_point(&game, 0, 1, p).unwrap(), 0.0);
        let fit = kl_minimizer_set(&game, &ProfileMixture::point(p), 0, TOL).unwrap();
        assert_eq!(fit, vec![1]);
    }
    let mix = ProfileMixture::new(vec![0, 2], vec![0.3, 0.7], 3).unwrap();
    assert_eq!(kl_minimizer_set(&game, &mix, 0, TOL).unwrap(), vec![1]);
}

/// Grid scan of the closed-form expected KL, independent of the library.
fn scan_fit(theta_true: f64, true_ability: f64, ability: f64, sigma: &[(f64, f64)], grid: &[f64]) -> f64 {
    let ekl = |t: f64| -> f64 {
        sigma
            .iter()
            .map(|&(a, w)| w * 0.5 * ((ability + a) * t - (true_ability + a) * theta_true).powi(2))
            .sum()
    };
    *grid.iter().min_by(|a, b| ekl(**a).total_cmp(&ekl(**b))).unwrap()
}

#[test]
fn best_fit_under_point_and_mixture() {
    let params = fine_params();
    let game = effort(1.0, 2.0, vec![0.0, 1.0, 2.0], params.clone());
    let fit = kl_minimizer_set(&game, &ProfileMixture::point(0), 0, TOL).unwrap();
    assert_eq!(fit.len(), 1);
    assert!((params.value(fit[0]) - 0.5).abs() < 1e-12);
    assert_eq!(params.value(fit[0]), scan_fit(1.0, 1.0, 2.0, &[(0.0, 1.0)], params.points()));

    let mix = ProfileMixture::new(vec![0, 2], vec![0.5, 0.5], 3).unwrap();
    let fit = kl_minimizer_set(&game, &mix, 0, TOL).unwrap();
    assert_eq!(fit.len(), 1);
    assert!((params.value(fit[0]) - 0.70).abs() < 1e-12);
    assert_eq!(
        params.value(fit[0]),
        scan_fit(1.0, 1.0, 2.0, &[(0.0, 0.5), (2.0, 0.5)], params.points())
    );
}

#[test]
fn expected_kl_is_linear_in_the_mixture() {
    let game = effort(1.0, 2.0, vec![0.0, 1.0, 2.0], fine_params());
    let mix = ProfileMixture::new(vec![0, 1, 2], vec![0.2, 0.3, 0.5], 3).unwrap();
    for theta in [0, 400, 1300] {
        let direct = expected_kl(&game, 0, theta, &mix).unwrap();
        let pieces: f64 = mix.iter().map(|(p, w)| w * kl_point(&game, 0, theta, p).unwrap()).sum();
        assert!((direct - pieces).abs() < 1e-15);
    }
}

fn constant_tabular(value: f64) -> GameSpec {
    let rows = |q: f64| vec![vec![q, 1.0 - q]; 4];
    let player = |name: &str| PlayerSpec {
        name: name.into(),
        actions: ActionGrid::new(vec![0.0, 1.0]).unwrap(),
        params: ParamGrid::new(vec![0.0, 1.0], 0.0, 1.0).unwrap(),
        model: ConsequenceModel::TabularFinite(TabularFinite {
            outcomes: vec![0.0, 1.0],
            truth: rows(0.4),
            family: vec![rows(0.3), rows(0.6)],
        }),
        payoff: PayoffFn::Table {
            values: vec![vec![value; 2]; 2],
        },
    };
    GameSpec::new(vec![player("a"), player("b")]).unwrap()
}

#[test]
fn constant_payoff_gives_constant_utility() {
    let game = constant_tabular(3.0);
    for belief in [vec![1.0, 0.0], vec![0.25, 0.75]] {
        let belief = ParamBelief::new(belief).unwrap();
        for opp in [vec![(0, 1.0)], vec![(0, 0.4), (1, 0.6)]] {
            let opp = OpponentMarginal::from_pairs(opp);
            for x in 0..2 {
                assert!((expected_utility(&game, 0, x, &belief, &opp).unwrap() - 3.0).abs() < 1e-14);
            }
            assert_eq!(best_response_set(&game, 0, &belief, &opp, TOL).unwrap(), vec![0, 1]);
        }
    }
}

#[test]
fn utility_is_linear_in_the_belief() {
    let game = common::random_tabular_game(
        3,
        common::TabularShape {
            players: 2,
            max_actions: 3,
            params: 3,
            outcomes: 3,
            correct: false,
        },
    );
    let b1 = ParamBelief::new(vec![0.6, 0.4, 0.0]).unwrap();
    let b2 = ParamBelief::new(vec![0.0, 0.1, 0.9]).unwrap();
    let opp = OpponentMarginal::from_pairs([(0, 0.5), (1, 0.5)]);
    for t in [0.0, 0.25, 0.5, 1.0] {
        let mixed = b1.mix(&b2, t);
        let u = expected_utility(&game, 0, 1, &mixed, &opp).unwrap();
        let parts = (1.0 - t) * expected_utility(&game, 0, 1, &b1, &opp).unwrap()
            + t * expected_utility(&game, 0, 1, &b2, &opp).unwrap();
        assert!((u - parts).abs() < 1e-14);
    }
}

fn team_worker_game() -> GameSpec {
    let ex = TeamExample::quadratic(1.0, 1.0, 2.0, 0.1).unwrap();
    let mut pts: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
    pts.push(0.618034);
    pts.sort_by(f64::total_cmp);
    team_game_on(
        &ex,
        ActionGrid::new(pts).unwrap(),
        ParamGrid::new(vec![0.5, 1.0], 0.0, 2.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn worker_utility_uses_expected_manager_effort() {
    let game = team_worker_game();
    let acts = &game.players()[1].actions;
    let (m_lo, m_hi) = (acts.nearest(0.4), acts.nearest(0.9));
    let grid = game.grid();
    // Opponent cells of worker 1: manager and worker 2 coordinates.
    let cell = |m: usize, w: usize| grid.opp_index(grid.encode(&[m, 0, w]), 1);
    let opp = OpponentMarginal::from_pairs([(cell(m_lo, 3), 0.5), (cell(m_hi, 70), 0.5)]);
    let mu = 0.5 * 0.4 + 0.5 * 0.9;
    for (k, theta) in [(0usize, 0.5), (1, 1.0)] {
        let belief = ParamBelief::point(2, k);
        for x in [0usize, 20, 55] {
            let a = acts.value(x);
            let expect = theta * 2.0 + theta * a * mu - a * a / 2.0;
            let got = expected_utility(&game, 1, x, &belief, &opp).unwrap();
            assert!((got - expect).abs() < 1e-14, "{got} vs {expect}");
        }
    }
}

#[test]
fn worker_best_response_is_theta_times_mu() {
    let game = team_worker_game();
    let acts = &game.players()[1].actions;
    let grid = game.grid();
    let m = acts.nearest(0.618034);
    let opp = OpponentMarginal::from_pairs([(grid.opp_index(grid.encode(&[m, 0, 0]), 1), 1.0)]);
    let br = best_response_set(&game, 1, &ParamBelief::point(2, 1), &opp, TOL).unwrap();
    let scan = (0..acts.len())
        .max_by(|&a, &b| {
            let u = |x: usize| acts.value(x) * 0.618034 - acts.value(x).powi(2) / 2.0;
            u(a).total_cmp(&u(b))
        })
        .unwrap();
    assert_eq!(br, vec![scan]);
    assert_eq!(acts.value(br[0]), 0.618034);
}

#[test]
fn single_agent_best_response_is_the_belief_mean() {
    let actions: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
    let game = effort(1.0, 2.0, actions, ParamGrid::new(vec![0.5, 1.5], 0.0, 2.0).unwrap());
    let opp = OpponentMarginal::trivial();
    let br = best_response_set(&game, 0, &ParamBelief::point(2, 0), &opp, TOL).unwrap();
    assert_eq!(br.len(), 1);
    assert!((game.players()[0].actions.value(br[0]) - 0.5).abs() < 1e-12);
    let mean = ParamBelief::new(vec![0.5, 0.5]).unwrap();
    let br = best_response_set(&game, 0, &mean, &opp, TOL).unwrap();
    assert!((game.players()[0].actions.value(br[0]) - 1.0).abs() < 1e-12);
}

#[test]
fn identical_payoffs_tie() {
    let game = constant_tabular(1.0);
    let opp = OpponentMarginal::from_pairs([(1, 1.0)]);
    let br = best_response_set(&game, 1, &ParamBelief::point(2, 0), &opp, TOL).unwrap();
    assert_eq!(br, vec![0, 1]);
}

#[test]
fn gaussian_log_likelihood_ratio() {
    let game = effort(1.0, 2.0, vec![0.0, 1.0], ParamGrid::new(vec![0.5, 1.2], 0.0, 2.0).unwrap());
    let y = 1.37;
    let lr = log_likelihood(&game, 0, 0, 1, y).unwrap() - log_likelihood(&game, 0, 1, 1, y).unwrap();
    let (m0, m1) = (0.5 * 3.0, 1.2 * 3.0);
    let expect = -0.5 * ((y - m0).powi(2) - (y - m1).powi(2));
    assert!((lr - expect).abs() < 1e-13);
}

#[test]
fn malformed_models_are_rejected() {
    let good = constant_tabular(1.0);
    let mut players = good.players().to_vec();
    if let ConsequenceModel::TabularFinite(t) = &mut players[0].model {
        t.truth[0] = vec![0.5, 0.6];
    }
    assert!(matches!(GameSpec::new(players), Err(ModelError::InvalidModel { player: 0, .. })));

    let mut players = good.players().to_vec();
    if let ConsequenceModel::TabularFinite(t) = &mut players[1].model {
        t.family[0][2] = vec![1.0, 0.0];
    }
    assert!(matches!(GameSpec::new(players), Err(ModelError::InvalidModel { player: 1, .. })));

    let mut players = good.players().to_vec();
    players[0].payoff = PayoffFn::Table { values: vec![vec![1.0, 2.0]] };
    assert!(GameSpec::new(players).is_err());

    assert!(matches!(GameSpec::new(vec![]), Err(ModelError::NoPlayers)));
    assert!(ActionGrid::new(vec![0.0, 0.0]).is_err());
    assert!(ActionGrid::new(vec![]).is_err());
    assert!(ParamGrid::new(vec![0.5, 3.0], 0.0, 2.0).is_err());
    assert!(ProfileMixture::new(vec![1, 1], vec![0.5, 0.5], 4).is_err());
    assert!(ProfileMixture::new(vec![9], vec![1.0], 4).is_err());
    assert!(ProfileMixture::new(vec![0, 1], vec![0.5, 0.4], 4).is_err());
}

#[test]
fn profile_grid_round_trip() {
    let game = common::random_tabular_game(
        1,
        common::TabularShape {
            players: 3,
            max_actions: 4,
            params: 2,
            outcomes: 2,
            correct: true,
        },
    );
    let grid = game.grid();
    for p in 0..grid.len() {
        let c = grid.decode(p);
        assert_eq!(grid.encode(&c), p);
        for i in 0..3 {
            assert_eq!(grid.join(i, c[i], grid.opp_index(p, i)), p);
        }
    }
}
