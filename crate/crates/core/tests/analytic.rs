mod common;

use bnlab::analytic::{
    effort_equilibria, effort_game, effort_plot, effort_rationalizable_interval, effort_theta_m,
    effort_two_cycles, effort_T, team_csi_profile, team_limits, team_plot, AnalyticError, EffortExample,
    Regime, TeamExample,
};
use bnlab::model::{kl_minimizer_set, CostFn, ProfileMixture};

#[test]
fn best_fit_formula() {
    let correct = EffortExample::quadratic(1.3, 1.0, 1.0).unwrap();
    for a in [0.0, 0.5, 3.0] {
        assert_eq!(effort_theta_m(&correct, a), 1.3);
    }
    let over = EffortExample::quadratic(1.0, 1.0, 2.0).unwrap();
    assert_eq!(effort_theta_m(&over, 0.0), 0.5);
    let gap = (effort_theta_m(&over, 1e3) - 1.0).abs();
    assert!(gap < 2e-3 && gap > 0.0);
    let samples: Vec<f64> = (0..50).map(|k| effort_theta_m(&over, k as f64 * 0.2)).collect();
    assert!(samples.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn best_fit_agrees_with_grid_minimizer() {
    let ex = EffortExample::quadratic(1.0, 1.0, 2.0).unwrap();
    let game = effort_game(&ex, 1e-3).unwrap();
    let params = &game.players()[0].params;
    for a in [0.0, 0.5, 1.0, 1.5] {
        let p = game.nearest_profile(&[a]);
        let fit = kl_minimizer_set(&game, &ProfileMixture::point(p), 0, 1e-12).unwrap();
        let theta = effort_theta_m(&ex, game.action_value(p, 0));
        assert!((params.value(fit[0]) - theta).abs() <= 5e-4 + 1e-12, "a = {a}");
    }
}

#[test]
fn t_map_properties() {
    let ex = EffortExample::quadratic(1.0, 1.0, 2.0).unwrap();
    assert_eq!(effort_T(&ex, 0.0), 0.5);
    let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 100_000).unwrap();
    assert!((ex.t_map(lo) - lo).abs() < 1e-9 && (ex.t_map(hi) - hi).abs() < 1e-9);
    let star = common::effort_fixed_point(1.0, 1.0, 2.0);
    assert!((star - 0.618034).abs() < 1e-6);
    assert!(common::hausdorff((lo, hi), (star, star)) < 1e-9);

    let under = EffortExample::quadratic(1.0, 2.0, 0.5).unwrap();
    assert_eq!(under.regime(), Regime::Underconfident);
    let top = under.action_cap();
    for k in 0..1000 {
        let (a, b) = (top * k as f64 / 1000.0, top * (k + 1) as f64 / 1000.0);
        assert!(under.t_map(b) < under.t_map(a));
    }
}

#[test]
fn correct_specification_interval_is_a_point() {
    let ex = EffortExample::quadratic(1.5, 0.7, 0.7).unwrap();
    let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 1000).unwrap();
    assert_eq!((lo, hi), (1.5, 1.5));
    assert_eq!(ex.regime(), Regime::Correct);
}

#[test]
fn underconfident_cycle_certificate() {
    let ex = EffortExample::underconfident_figure().unwrap();
    let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 1_000_000).unwrap();
    assert!((ex.t_map(lo) - hi).abs() < 1e-9 && (ex.t_map(hi) - lo).abs() < 1e-9);
    let cycles = effort_two_cycles(&ex, 20_000).unwrap();
    assert_eq!(cycles.len(), 1);
    assert!(common::hausdorff(cycles[0], (lo, hi)) < 1e-9);
    let eq = effort_equilibria(&ex, 20_000).unwrap();
    assert_eq!(eq.len(), 1);
    assert!(lo < eq[0] && eq[0] < hi);
    let oracle = common::two_cycle(common::under_figure_marginal, 1.0, 1.0, 0.5);
    assert!(common::hausdorff((lo, hi), oracle) < 1e-4);
    // Read off the published figure: the cycle runs from about 0.22 to 0.94.
    assert!((lo - 0.22).abs() < 0.03 && (hi - 0.94).abs() < 0.03);
}

#[test]
fn overconfident_figure_has_three_equilibria() {
    let ex = EffortExample::overconfident_figure().unwrap();
    let eq = effort_equilibria(&ex, 20_000).unwrap();
    assert_eq!(eq.len(), 3);
    let t = |a: f64| common::invert(common::over_figure_marginal, 1.0 + (1.0 - 3.0) / (3.0 + a));
    for (&a, (l, h)) in eq.iter().zip([(0.0, 0.45), (0.45, 1.0), (1.0, 2.0)]) {
        let oracle = common::bisect(|x| t(x) - x, l, h);
        assert!((a - oracle).abs() < 1e-4, "{a} vs {oracle}");
    }
    // Caption values: roughly .27, .65 and 1.4.
    for (a, caption) in eq.iter().zip([0.27, 0.65, 1.4]) {
        assert!((a - caption).abs() < 0.02, "{a} vs {caption}");
    }
    let (lo, hi) = effort_rationalizable_interval(&ex, 1e-12, 1_000_000).unwrap();
    assert!((lo - eq[0]).abs() < 1e-9 && (hi - eq[2]).abs() < 1e-9);
}

#[test]
fn team_limits_and_zero_gap() {
    let ex = TeamExample::quadratic(1.0, 1.0, 2.0, 0.1).unwrap();
    let lim = team_limits(&ex, 1e-13).unwrap();
    assert!((lim.m_inf - 0.618034).abs() < 1e-6);
    assert!((lim.n_inf - 0.338261).abs() < 1e-6);
    assert!((lim.k_star - 0.029244).abs() < 1e-6);
    for true_ability in [0.5, 1.0, 3.0] {
        let ex = TeamExample::quadratic(1.0, true_ability, true_ability, 0.1).unwrap();
        assert_eq!(team_limits(&ex, 1e-12).unwrap().k_star, 0.0);
        assert_eq!(team_csi_profile(&ex).unwrap(), (1.0, 1.0));
    }
    let ex = TeamExample::quadratic(2.0, 1.0, 1.0, 0.1).unwrap();
    assert_eq!(team_csi_profile(&ex).unwrap(), (2.0, 4.0));
    let mis = TeamExample::quadratic(1.0, 1.0, 2.0, 0.1).unwrap();
    assert!(matches!(team_csi_profile(&mis), Err(AnalyticError::NotCorrectlySpecified { .. })));
}

#[test]
fn plot_annotations() {
    let over = effort_plot(&EffortExample::overconfident_figure().unwrap(), 101).unwrap();
    assert_eq!(over.columns, vec!["a", "theta_m", "marginal_cost"]);
    assert_eq!(over.rows.len(), 101);
    for label in ["a_S", "a_M", "a_L", "a_min_inf", "a_max_inf", "a_opt"] {
        assert!(over.annotation(label).is_some(), "{label}");
    }
    let under = effort_plot(&EffortExample::underconfident_figure().unwrap(), 50).unwrap();
    let bne = under.annotation("bne").unwrap().x;
    let (lo, hi) = (under.annotation("a_min_inf").unwrap().x, under.annotation("a_max_inf").unwrap().x);
    assert!(lo < bne && bne < hi);

    let ex = TeamExample::quadratic(1.0, 1.0, 1.0, 0.1).unwrap();
    let team = team_plot(&ex, 20).unwrap();
    assert_eq!(team.annotation("k_star").unwrap().x, 0.0);
    let mis = team_plot(&TeamExample::quadratic(1.0, 1.0, 2.0, 0.1).unwrap(), 1000).unwrap();
    let diffs: Vec<f64> = mis.rows.iter().map(|r| r[3]).collect();
    assert!(diffs.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert!((diffs[999] - mis.annotation("k_star").unwrap().x).abs() < 1e-9);
}

#[test]
fn invalid_examples() {
    assert!(EffortExample::quadratic(0.0, 1.0, 1.0).is_err());
    assert!(EffortExample::quadratic(1.0, -1.0, 1.0).is_err());
    assert!(EffortExample::quadratic(1.0, 1.0, 0.0).is_err());
    assert!(CostFn::tabulated(vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 2.0]).is_err());
    assert!(CostFn::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]).is_err());
    assert!(EffortExample::new(1.0, 1.0, 2.0, CostFn::quadratic(-1.0)).is_err());
    let ex = EffortExample::quadratic(1.0, 1.0, 2.0).unwrap();
    assert!(effort_rationalizable_interval(&ex, 0.0, 10).is_err());
    assert!(matches!(
        effort_rationalizable_interval(&ex, 1e-12, 1),
        Err(AnalyticError::NotConverged { .. })
    ));
    assert!(effort_game(&ex, 0.0).is_err());
    assert!(TeamExample::quadratic(1.0, 1.0, 2.0, 0.0).is_err());
}
