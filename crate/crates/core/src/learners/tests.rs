use super::*;
use crate::simdg::sample_tree_function;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, d, |_, _| f64::sample_standard_normal(&mut rng))
}

fn variance(y: &DVector<f64>) -> f64 {
    let m = y.mean();
    y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / y.len() as f64
}

fn all_learners() -> Vec<LearnerConfig> {
    vec![
        LearnerConfig::constant(),
        LearnerConfig::ols(),
        LearnerConfig::ridge(0.5),
        LearnerConfig::tree(TreeParams::default()),
        LearnerConfig::tree(TreeParams { max_depth: Some(3), min_leaf: 5 }),
        LearnerConfig::forest(20).with_seed(3),
        LearnerConfig::boost(BoostParams { n_rounds: 30, learning_rate: 0.1, max_depth: 3, min_leaf: 1 }),
    ]
}

#[test]
fn constant_model() {
    let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
    let m = fit_constant(&y).unwrap();
    assert_eq!(m.predict(&DMatrix::zeros(2, 4)).unwrap().as_slice(), &[2.0, 2.0]);
    let seven = fit_constant(&DVector::from_element(5, 7.0)).unwrap();
    assert_eq!(seven.value(), 7.0);
    let x = DMatrix::<f64>::zeros(3, 1);
    let fitted = LearnerConfig::constant().fit(&x, &y).unwrap();
    let train_mse: f64 = mse(&fitted.predict(&x).unwrap(), &y);
    assert!((train_mse - 2.0 / 3.0).abs() < 1e-15);
    assert!(matches!(fit_constant::<f64>(&DVector::zeros(0)), Err(Error::Empty(_))));
}

#[test]
fn ols_exact_line() {
    let x = DMatrix::<f64>::from_column_slice(5, 1, &[-2.0, -1.0, 0.5, 1.0, 3.0]);
    let y = x.column(0) * 2.0;
    let m = fit_ols(&x, &y).unwrap();
    assert!((m.coefficients[0] - 2.0).abs() < 1e-10);
    assert!(m.intercept.abs() < 1e-10);
}

#[test]
fn ridge_large_penalty_predicts_mean() {
    let x = gaussian(40, 3, 1);
    let y = x.column(0) * 3.0 + x.column(2);
    let m = fit_ridge(&x, &y, 1e12).unwrap();
    assert!(m.coefficients.abs().max() < 1e-9);
    let pred = m.predict(&x).unwrap();
    assert!((pred - DVector::from_element(40, y.mean())).abs().max() < 1e-8);
    assert!(fit_ridge(&x, &y, 0.0).is_err());
}

#[test]
fn ols_duplicated_column_matches_deduplicated_design() {
    let base = gaussian(30, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let y = DVector::from_fn(30, |i, _| base[(i, 0)] - 0.5 * base[(i, 1)] + f64::sample_standard_normal(&mut rng));
    let dup = DMatrix::from_fn(30, 3, |i, j| base[(i, j.min(1))]);
    let full = fit_ols(&dup, &y).unwrap().predict(&dup).unwrap();
    let reduced = fit_ols(&base, &y).unwrap().predict(&base).unwrap();
    assert!((full - reduced).abs().max() < 1e-9);
}

#[test]
fn tree_on_constant_target_is_single_leaf() {
    let x = gaussian(50, 3, 3);
    let y = DVector::from_element(50, 4.5);
    let t = RegressionTree::fit(&x, &y, &SplitParams::from(TreeParams::default()), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(t.n_leaves(), 1);
    assert!(t.predict(&x).unwrap().iter().all(|&v| v == 4.5));
}

#[test]
fn tree_learns_step_in_one_split() {
    let x = gaussian(80, 2, 4);
    let y = DVector::from_fn(80, |i, _| if x[(i, 0)] <= 0.3 { -1.0 } else { 2.0 });
    let t = RegressionTree::fit(&x, &y, &SplitParams::from(TreeParams::default()), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(t.depth(), 1);
    assert_eq!(mse(&t.predict(&x).unwrap(), &y), 0.0);
}

#[test]
fn tree_with_too_few_rows_is_root_only() {
    let x = gaussian(4, 2, 5);
    let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    let params = SplitParams::from(TreeParams { max_depth: None, min_leaf: 4 });
    let t = RegressionTree::fit(&x, &y, &params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(t.n_leaves(), 1);
    assert!(t.predict(&x).unwrap().iter().all(|&v| v == 2.5));
}

#[test]
fn tree_ties_go_left() {
    let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
    let y = DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]);
    let t = RegressionTree::fit(&x, &y, &SplitParams::from(TreeParams::default()), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let probe = DMatrix::from_column_slice(3, 1, &[1.5, 1.4999, 1.5001]);
    assert_eq!(t.predict(&probe).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
}

#[test]
fn tree_reproduces_noiseless_tree_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f0 = sample_tree_function::<f64, _>(10, 3, 3, 1.5, (-2.0, 2.0), &mut rng).unwrap();
    let x = gaussian(600, 10, 7) * 1.5;
    let y = f0.evaluate(&x).unwrap();
    let learner = LearnerConfig::tree(TreeParams { max_depth: None, min_leaf: 1 });
    let fitted = learner.fit(&x, &y).unwrap();
    assert!(mse(&fitted.predict(&x).unwrap(), &y) <= 1e-3 * variance(&y));
}

#[test]
fn degenerate_forest_equals_single_tree() {
    let x = gaussian(100, 4, 8);
    let y = DVector::from_fn(100, |i, _| x[(i, 0)].sin() + x[(i, 1)] * x[(i, 2)]);
    let params = ForestParams { n_trees: 1, bootstrap: false, mtry_fraction: 1.0, max_depth: None, min_leaf: 2 };
    let forest = RandomForest::fit(&x, &y, &params, 11).unwrap();
    let tree = RegressionTree::fit(&x, &y, &SplitParams::from(TreeParams { max_depth: None, min_leaf: 2 }), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(forest.trees()[0], tree);
    assert_eq!(forest.predict(&x).unwrap(), tree.predict(&x).unwrap());
}

#[test]
fn forest_constant_target_and_determinism() {
    let x = gaussian(60, 5, 9);
    let y = DVector::from_element(60, -1.25);
    let f = RandomForest::fit(&x, &y, &ForestParams::default(), 1).unwrap();
    assert!(f.predict(&x).unwrap().iter().all(|&v| v == -1.25));

    let y2 = x.column(0) + x.column(3);
    let a = LearnerConfig::forest(15).with_seed(5).fit(&x, &y2).unwrap().predict(&x).unwrap();
    let b = LearnerConfig::forest(15).with_seed(5).fit(&x, &y2).unwrap().predict(&x).unwrap();
    assert_eq!(a, b);
}

#[test]
fn one_round_boost_equals_tree() {
    let x = gaussian(70, 3, 10);
    let y = DVector::from_fn(70, |i, _| x[(i, 0)] + (x[(i, 1)] > 0.0) as u8 as f64);
    let params = BoostParams { n_rounds: 1, learning_rate: 1.0, max_depth: 20, min_leaf: 1 };
    let boost = GradientBoosting::fit(&x, &y, &params, 0).unwrap();
    let split = SplitParams { max_depth: Some(20), min_leaf: 1, max_features: None };
    let tree = RegressionTree::fit(&x, &y, &split, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!((boost.predict(&x).unwrap() - tree.predict(&x).unwrap()).abs().max() < 1e-12);
}

#[test]
fn boosting_rejects_zero_learning_rate() {
    let x = gaussian(10, 1, 1);
    let y = x.column(0).into_owned();
    let params = BoostParams { learning_rate: 0.0, ..BoostParams::default() };
    assert!(GradientBoosting::fit(&x, &y, &params, 0).is_err());
    assert!(LearnerConfig::boost(params).fit(&x, &y).is_err());
}

#[test]
fn boosting_training_error_is_monotone() {
    let x = gaussian(150, 4, 12);
    let y = DVector::from_fn(150, |i, _| (2.0 * x[(i, 0)]).sin() + x[(i, 1)].abs());
    let params = BoostParams { n_rounds: 60, learning_rate: 0.3, max_depth: 3, min_leaf: 2 };
    let b = GradientBoosting::fit(&x, &y, &params, 0).unwrap();
    assert_eq!(b.train_mse().len(), 61);
    for w in b.train_mse().windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
}

#[test]
fn every_learner_beats_or_ties_constant_in_sample() {
    let x = gaussian(120, 3, 13);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let y = DVector::from_fn(120, |i, _| x[(i, 0)] * x[(i, 1)] + 0.3 * f64::sample_standard_normal(&mut rng));
    for cfg in all_learners() {
        let fitted = cfg.fit(&x, &y).unwrap();
        let pred = fitted.predict(&x).unwrap();
        assert!(pred.iter().all(|v| v.is_finite()), "{cfg:?}");
        if !matches!(cfg.kind, LearnerKind::Ridge(_)) {
            assert!(mse(&pred, &y) <= variance(&y) + 1e-12, "{cfg:?}");
        }
        let again = cfg.fit(&x, &y).unwrap().predict(&x).unwrap();
        assert_eq!(pred, again, "{cfg:?} not deterministic");
    }
}

#[test]
fn prediction_checks_feature_count() {
    let x = gaussian(20, 3, 15);
    let y = x.column(0).into_owned();
    for cfg in all_learners() {
        let fitted = cfg.fit(&x, &y).unwrap();
        assert!(fitted.predict(&DMatrix::zeros(2, 4)).is_err(), "{cfg:?}");
    }
}

#[test]
fn training_data_validation() {
    let x = gaussian(5, 2, 1);
    let cfg = LearnerConfig::ols();
    assert!(matches!(cfg.fit(&x, &DVector::<f64>::zeros(4)), Err(Error::Dimension(_))));
    assert!(matches!(cfg.fit(&DMatrix::<f64>::zeros(0, 2), &DVector::zeros(0)), Err(Error::Empty(_))));
    let mut bad = x.clone();
    bad[(0, 0)] = f64::INFINITY;
    assert!(cfg.fit(&bad, &DVector::zeros(5)).is_err());
}

#[test]
fn config_json_round_trip() {
    let cfg = LearnerConfig::forest(100).with_seed(4);
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<LearnerConfig>(&text).unwrap(), cfg);
    let parsed: LearnerConfig = serde_json::from_str(r#"{"kind":"boost","learning_rate":0.025}"#).unwrap();
    match parsed.kind {
        LearnerKind::Boost(b) => {
            assert_eq!(b.learning_rate, 0.025);
            assert_eq!(b.max_depth, 6);
            assert_eq!(b.n_rounds, 500);
        }
        other => panic!("unexpected {other:?}"),
    }
    let ols: LearnerConfig = serde_json::from_str(r#"{"kind":"ols"}"#).unwrap();
    assert_eq!(ols, LearnerConfig::ols());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn forest_is_mean_of_trees(seed in any::<u64>(), n_trees in 1usize..8) {
        let x = gaussian(40, 3, seed);
        let y = DVector::from_fn(40, |i, _| x[(i, 0)] - x[(i, 2)].powi(2));
        let params = ForestParams { n_trees, ..ForestParams::default() };
        let forest = RandomForest::fit(&x, &y, &params, seed).unwrap();
        let mut total = DVector::zeros(40);
        for t in forest.trees() {
            total += t.predict(&x).unwrap();
        }
        prop_assert_eq!(forest.predict(&x).unwrap(), total / n_trees as f64);
    }
}
