mod common;

use bnlab::analytic::{effort_rationalizable_interval, EffortExample};
use bnlab::io::SpecDocument;
use bnlab::model::{
    best_response_set, expected_kl, kl_minimizer_set, GameSpec, OpponentMarginal, ParamBelief, PayoffFn,
    ProfileMixture,
};
use bnlab::sim::ForecastState;
use bnlab::solver::{iterate_to_fixed, logit_probabilities, Operator, SigmaSearchPolicy};
use common::{random_tabular_game, TabularShape};
use proptest::prelude::*;

const SHAPE: TabularShape = TabularShape {
    players: 2,
    max_actions: 3,
    params: 3,
    outcomes: 3,
    correct: false,
};

fn affine(game: &GameSpec, scale: f64, shift: f64) -> GameSpec {
    let players = game
        .players()
        .iter()
        .cloned()
        .map(|mut p| {
            if let PayoffFn::Table { values } = &mut p.payoff {
                for v in values.iter_mut().flatten() {
                    *v = scale * *v + shift;
                }
            }
            p
        })
        .collect();
    GameSpec::new(players).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expected_kl_is_nonnegative(seed in 0u64..10_000, w in 0.0f64..1.0) {
        let game = random_tabular_game(seed, SHAPE);
        let n = game.n_profiles();
        let sigma = ProfileMixture::new(vec![0, n - 1], vec![w, 1.0 - w], n).unwrap();
        for i in 0..2 {
            for theta in 0..SHAPE.params {
                prop_assert!(expected_kl(&game, i, theta, &sigma).unwrap() >= -1e-15);
            }
            let fit = kl_minimizer_set(&game, &sigma, i, 1e-12).unwrap();
            let best = (0..SHAPE.params)
                .map(|k| expected_kl(&game, i, k, &sigma).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(!fit.is_empty());
            for k in fit {
                prop_assert!(expected_kl(&game, i, k, &sigma).unwrap() <= best + 1e-12);
            }
        }
    }

    #[test]
    fn best_responses_ignore_affine_payoff_changes(
        seed in 0u64..10_000,
        scale in 0.5f64..4.0,
        shift in -3.0f64..3.0,
        raw in proptest::collection::vec(0.01f64..1.0, 3),
    ) {
        let game = random_tabular_game(seed, SHAPE);
        let moved = affine(&game, scale, shift);
        let total: f64 = raw.iter().sum();
        let belief = ParamBelief::new(raw.iter().map(|x| x / total).collect()).unwrap();
        for i in 0..2 {
            let opp_len = game.grid().opp_len(i);
            let opp = OpponentMarginal::from_pairs((0..opp_len).map(|c| (c, 1.0 / opp_len as f64)));
            let a = best_response_set(&game, i, &belief, &opp, 1e-12).unwrap();
            let b = best_response_set(&moved, i, &belief, &opp, 1e-12).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn survivors_ignore_affine_payoff_changes(seed in 0u64..10_000, scale in 1.0f64..3.0, shift in -2.0f64..2.0) {
        let game = random_tabular_game(seed, SHAPE);
        let moved = affine(&game, scale, shift);
        let policy = SigmaSearchPolicy::SimplexGrid { mesh: 4, max_support: 2 };
        let a = iterate_to_fixed(&game, Operator::Gamma, &policy, 100, 1e-12).unwrap();
        let b = iterate_to_fixed(&moved, Operator::Gamma, &policy, 100, 1e-12).unwrap();
        prop_assert_eq!(a.survivors.to_vec(), b.survivors.to_vec());
    }

    #[test]
    fn spec_documents_round_trip(seed in 0u64..10_000) {
        let game = random_tabular_game(seed, SHAPE);
        let doc = SpecDocument::from_game(&game);
        let text = doc.to_toml_string().unwrap();
        let back = SpecDocument::from_toml_str(&text).unwrap();
        prop_assert_eq!(back.to_toml_string().unwrap(), text);
        prop_assert_eq!(back.hash().unwrap(), doc.hash().unwrap());
        prop_assert_eq!(back.to_game().unwrap(), game);
    }

    #[test]
    fn logit_is_a_shift_invariant_distribution(
        utils in proptest::collection::vec(-5.0f64..5.0, 1..6),
        lambda in 0.01f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let p = logit_probabilities(&utils, lambda);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = utils.iter().map(|u| u + shift).collect();
        for (x, y) in p.iter().zip(logit_probabilities(&shifted, lambda)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        for i in 0..utils.len() {
            for j in 0..utils.len() {
                if utils[i] > utils[j] {
                    prop_assert!(p[i] >= p[j]);
                }
            }
        }
    }

    #[test]
    fn forecast_weights_stay_a_distribution(cells in 2usize..12, draws in proptest::collection::vec(0usize..64, 0..200)) {
        let mut f = ForecastState::uniform(cells, 1.0).unwrap();
        for d in draws {
            f.update(d % cells);
        }
        let w = f.weights();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x >= f.support_floor() - 1e-15));
    }

    #[test]
    fn effort_interval_contains_the_equilibrium(
        theta in 0.5f64..2.0,
        true_ability in 0.2f64..2.0,
        ability in 0.2f64..2.0,
    ) {
        let ex = EffortExample::quadratic(theta, true_ability, ability).unwrap();
        let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 1_000_000).unwrap();
        let star = common::effort_fixed_point(theta, true_ability, ability);
        prop_assert!(lo <= star + 1e-6 && star <= hi + 1e-6, "{} not in [{}, {}]", star, lo, hi);
        if ability >= true_ability {
            prop_assert!(hi - lo < 1e-6);
        }
    }
}
