use super::*;
use crate::linalg::{column_space_projection, subspace_distance, svd};
use crate::simdg::sample_m0;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| f64::sample_standard_normal(rng))
}

/// Reference rank-k solution computed in sample space: project `X` on the
/// top-`k` left singular vectors of the OLS fitted values, then regress on `Z`.
fn sample_space_rank_k(x: &DMatrix<f64>, z: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let ztz_inv = (z.transpose() * z).try_inverse().unwrap();
    let fitted = z * &ztz_inv * z.transpose() * x;
    let dec = svd(&fitted).unwrap();
    let pk = dec.u.columns(0, k);
    let projected = &pk * (pk.transpose() * x);
    (ztz_inv * z.transpose() * projected).transpose()
}

#[test]
fn matches_sample_space_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let z = gaussian(60, 4, &mut rng);
    let x = gaussian(60, 6, &mut rng) + &z * gaussian(6, 4, &mut rng).transpose();
    for k in 0..=4 {
        let fast = fit_rank_k(&x, &z, k).unwrap();
        let reference = sample_space_rank_k(&x, &z, k);
        assert!((fast - reference).abs().max() < 1e-10, "rank {k}");
    }
}

#[test]
fn noiseless_recovery_at_true_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m0 = sample_m0::<f64, _>(10, 5, 3, 1.0, &mut rng).unwrap();
    let z = gaussian(200, 5, &mut rng);
    let x = &z * m0.transpose();
    let m3 = fit_rank_k(&x, &z, 3).unwrap();
    assert!((m3 - &m0).abs().max() <= 1e-8 * m0.abs().max());
}

#[test]
fn rank_zero_is_zero_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z = gaussian(30, 3, &mut rng);
    let x = gaussian(30, 4, &mut rng);
    let m = fit_rank_k(&x, &z, 0).unwrap();
    assert_eq!(m, DMatrix::zeros(4, 3));
    let path = ReducedRankPath::new(&x, &z).unwrap();
    assert!((path.residual_ss(&x, &z, 0) - frobenius_sq(&x)).abs() < 1e-12);
}

#[test]
fn square_invertible_design_gives_ols() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let z = gaussian(4, 4, &mut rng);
    let x = gaussian(4, 4, &mut rng);
    let m = fit_rank_k(&x, &z, 4).unwrap();
    let ols = (z.clone().try_inverse().unwrap() * &x).transpose();
    assert!((m - ols).abs().max() < 1e-8);
    // An exactly solvable system has zero residual.
    assert!(frobenius_sq(&(&x - &z * fit_rank_k(&x, &z, 4).unwrap().transpose())) < 1e-16);
}

#[test]
fn singular_design_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let col = gaussian(20, 1, &mut rng);
    let z = DMatrix::from_fn(20, 2, |i, _| col[i]);
    let x = gaussian(20, 3, &mut rng);
    assert!(matches!(fit_rank_k(&x, &z, 1), Err(Error::RankDeficientDesign(_))));
    let wide = gaussian(2, 3, &mut rng);
    assert!(matches!(fit_rank_k(&x.rows(0, 2).into_owned(), &wide, 1), Err(Error::RankDeficientDesign(_))));
}

#[test]
fn rank_above_min_dimension_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = gaussian(20, 2, &mut rng);
    let x = gaussian(20, 3, &mut rng);
    assert!(matches!(fit_rank_k(&x, &z, 3), Err(Error::Dimension(_))));
}

#[test]
fn penalty_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = gaussian(100, 4, &mut rng);
    let x = gaussian(100, 6, &mut rng) + &z * gaussian(6, 4, &mut rng).transpose();
    assert_eq!(select_rank(&x, &z, 1e12).unwrap().q_hat, 0);
    assert_eq!(select_rank(&x, &z, 1e-12).unwrap().q_hat, 4);
    assert!(select_rank(&x, &z, 0.0).is_err());
}

#[test]
fn noiseless_rank_three_selected() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m0 = sample_m0::<f64, _>(8, 6, 3, 1.0, &mut rng).unwrap();
    let z = gaussian(100, 6, &mut rng);
    let x = &z * m0.transpose();
    let sel = select_rank(&x, &z, 1.0).unwrap();
    assert_eq!(sel.q_hat, 3);
    assert_eq!(sel.criterion.len(), 7);
    // Past the true rank the criterion grows by λ per extra rank.
    for k in 4..=6 {
        assert!((sel.criterion[k] - sel.criterion[k - 1] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn single_grid_value_is_returned() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let z = gaussian(50, 3, &mut rng);
    let x = gaussian(50, 3, &mut rng);
    let sel = cross_validate_lambda(&x, &z, &[2.5], 5, 0, true, LambdaRule::MinError).unwrap();
    assert_eq!(sel.lambda, 2.5);
}

#[test]
fn cross_validation_contract_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let z = gaussian(10, 2, &mut rng);
    let x = gaussian(10, 2, &mut rng);
    assert!(cross_validate_lambda(&x, &z, &[], 5, 0, true, LambdaRule::MinError).is_err());
    assert!(cross_validate_lambda(&x, &z, &[1.0], 1, 0, true, LambdaRule::MinError).is_err());
    assert!(cross_validate_lambda(&x, &z, &[-1.0], 2, 0, true, LambdaRule::MinError).is_err());
}

#[test]
fn noiseless_cross_validation_recovers_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m0 = sample_m0::<f64, _>(6, 5, 2, 1.0, &mut rng).unwrap();
    let z = gaussian(120, 5, &mut rng);
    let x = &z * m0.transpose();
    let grid = default_lambda_grid(&x, 5, 20, (1e-3, 1e2));
    let lambda = cross_validate_lambda(&x, &z, &grid, 5, 3, false, LambdaRule::MinError).unwrap().lambda;
    assert_eq!(select_rank(&x, &z, lambda).unwrap().q_hat, 2);
}

#[test]
fn one_standard_error_rule_never_picks_a_smaller_penalty() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + seed);
        let m0 = sample_m0::<f64, _>(6, 6, 3, 0.5, &mut rng).unwrap();
        let z = gaussian(150, 6, &mut rng);
        let x = &z * m0.transpose() + gaussian(150, 6, &mut rng);
        let grid = default_lambda_grid(&x, 6, 20, (1e-3, 1e2));
        let min = cross_validate_lambda(&x, &z, &grid, 5, seed, true, LambdaRule::MinError).unwrap();
        let one_se = cross_validate_lambda(&x, &z, &grid, 5, seed, true, LambdaRule::OneStandardError).unwrap();
        assert_eq!(min.mean_errors, one_se.mean_errors);
        assert!(one_se.lambda >= min.lambda);
        let best = min.mean_errors.iter().copied().fold(f64::INFINITY, f64::min);
        let g = grid.iter().position(|&l| l == min.lambda).unwrap();
        let chosen = grid.iter().position(|&l| l == one_se.lambda).unwrap();
        assert!(one_se.mean_errors[chosen] <= best + min.standard_errors[g]);
        for h in chosen + 1..grid.len() {
            assert!(one_se.mean_errors[h] > best + min.standard_errors[g]);
        }
    }
}

#[test]
fn standard_errors_match_fold_spread() {
    // With a single grid value the mean and its standard error are recomputed by hand.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let z = gaussian(50, 3, &mut rng);
    let x = gaussian(50, 4, &mut rng);
    let sel = cross_validate_lambda(&x, &z, &[1e9], 5, 0, false, LambdaRule::MinError).unwrap();
    let mut perm: Vec<usize> = (0..50).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut stream(0, 0));
    let errs: Vec<f64> = (0..5)
        .map(|f| {
            let val: Vec<usize> = perm.iter().skip(f).step_by(5).copied().collect();
            x.select_rows(&val).norm_squared() / val.len() as f64
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / 5.0;
    let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
    assert!((sel.mean_errors[0] - mean).abs() <= 1e-12 * mean);
    assert!((sel.standard_errors[0] - sd / 5f64.sqrt()).abs() <= 1e-12 * mean);
}

#[test]
fn pure_noise_selects_rank_zero() {
    // Independent X and Z: the selected penalty should drop all ranks.
    let mut zero = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let z = gaussian(500, 5, &mut rng);
        let x = gaussian(500, 5, &mut rng);
        let cfg = RankRegConfig {
            seed,
            ..RankRegConfig::default()
        };
        if fit(&x, &z, &cfg).unwrap().q_hat == 0 {
            zero += 1;
        }
    }
    assert!(zero >= 45, "q_hat = 0 in only {zero}/50 runs");
}

#[test]
fn independent_design_leaves_residuals_untouched() {
    let mut ok = 0;
    for seed in 0..9 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let z = gaussian(1000, 5, &mut rng);
        let x = gaussian(1000, 10, &mut rng);
        let fit = fit(&x, &z, &RankRegConfig { seed, ..Default::default() }).unwrap();
        if fit.q_hat == 0 {
            let xc = center_with(&x, fit.x_mean.as_ref().unwrap());
            assert_eq!(fit.v_hat, xc);
            assert_eq!(fit.r_hat.basis().unwrap().matrix(), &DMatrix::identity(10, 10));
            ok += 1;
        }
    }
    assert!(ok >= 5, "only {ok}/9 runs selected rank zero");
}

#[test]
fn noiseless_fit_recovers_column_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m0 = sample_m0::<f64, _>(10, 5, 3, 1.0, &mut rng).unwrap();
    let z = gaussian(200, 5, &mut rng);
    let x = &z * m0.transpose();
    let fit = fit(&x, &z, &RankRegConfig::default()).unwrap();
    assert_eq!(fit.q_hat, 3);
    assert!(subspace_distance(&fit.m_hat, &m0).unwrap() <= 1e-8);
}

#[test]
fn projections_partition_identity_and_residual_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m0 = sample_m0::<f64, _>(6, 4, 2, 2.0, &mut rng).unwrap();
    let z = gaussian(400, 4, &mut rng);
    let x = &z * m0.transpose() + gaussian(400, 6, &mut rng);
    let fit = fit(&x, &z, &RankRegConfig::default()).unwrap();
    assert!(fit.q_hat < 6);
    let total = fit.r_hat.projection() + column_space_projection(&fit.m_hat).unwrap();
    assert!((total - DMatrix::identity(6, 6)).abs().max() <= 1e-8);
    let r = fit.r_hat.basis().unwrap().matrix();
    assert!((r.transpose() * &fit.m_hat).abs().max() <= 1e-8);

    let xc = center_with(&x, fit.x_mean.as_ref().unwrap());
    let zc = center_with(&z, fit.z_mean.as_ref().unwrap());
    let back = &zc * fit.m_hat.transpose() + &fit.v_hat;
    assert!((back - &xc).abs().max() <= 1e-12);
    assert_eq!(fit.control_residuals(&x, &z).unwrap(), fit.v_hat);
}

#[test]
fn distance_shrinks_with_sample_size() {
    let mean_distance = |n: usize| {
        let mut total = 0.0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
            let m0 = sample_m0::<f64, _>(10, 10, 5, 1.0, &mut rng).unwrap();
            let z = gaussian(n, 10, &mut rng);
            let x = &z * m0.transpose() + gaussian(n, 10, &mut rng);
            let fit = fit(&x, &z, &RankRegConfig { seed, ..Default::default() }).unwrap();
            total += subspace_distance(&fit.m_hat, &m0).unwrap();
        }
        total / 20.0
    };
    assert!(mean_distance(2000) < mean_distance(100));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_non_increasing_in_rank(seed in any::<u64>(), n in 12usize..60, p in 1usize..6, r in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = gaussian(n, r, &mut rng);
        let x = gaussian(n, p, &mut rng) + &z * gaussian(p, r, &mut rng).transpose();
        let path = ReducedRankPath::new(&x, &z).unwrap();
        let rss: Vec<f64> = (0..=path.max_rank()).map(|k| path.residual_ss(&x, &z, k)).collect();
        for w in rss.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }
}
