//! Reduced-rank regression of `X` on `Z` with a penalized rank-selection
//! criterion and a cross-validated penalty.
//!
//! For a penalty `λ` the estimate minimizes `‖X − Z Mᵀ‖_F² + λ·rank(M)`,
//! evaluated by computing the best rank-`k` fit for every `k` in closed form
//! and keeping the minimizing `k`.

mod path;

pub use path::{fit_rank_k, ReducedRankPath};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{ensure_finite, frobenius_sq, null_space_basis, NullSpace};
use crate::seed::stream;
use crate::Scalar;

/// Settings for [`fit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankRegConfig {
    /// Explicit penalty grid; when absent a log-spaced grid is built from the data.
    pub lambda_grid: Option<Vec<f64>>,
    pub grid_size: usize,
    /// Grid endpoints as multiples of `‖X‖_F² / min(p, r)`.
    pub grid_span: (f64, f64),
    pub folds: usize,
    pub seed: u64,
    /// Subtract column means of `X` and `Z` before fitting.
    pub center: bool,
    pub rule: LambdaRule,
}

/// How the cross-validated penalty is read off the error curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// Smallest mean error; the smallest `λ` on exact ties.
    MinError,
    /// Largest `λ` whose mean error is within one standard error (across
    /// folds) of the minimum.
    #[default]
    OneStandardError,
}

impl Default for RankRegConfig {
    fn default() -> Self {
        Self {
            lambda_grid: None,
            grid_size: 20,
            grid_span: (1e-3, 1e2),
            folds: 5,
            seed: 0,
            center: true,
            rule: LambdaRule::default(),
        }
    }
}

/// Result of the rank-selection criterion at a single penalty.
#[derive(Clone, Debug)]
pub struct RankSelection<T: Scalar> {
    pub q_hat: usize,
    pub m_hat: DMatrix<T>,
    /// `‖X − Z M_kᵀ‖_F² + λk` for `k = 0, …, min(p, r)`.
    pub criterion: Vec<T>,
}

/// Fitted first stage.
#[derive(Clone, Debug)]
pub struct RankRegFit<T: Scalar> {
    pub m_hat: DMatrix<T>,
    pub q_hat: usize,
    pub r_hat: NullSpace<T>,
    /// Control residuals `X − Z M̂ᵀ` (of the centered data when centering is on).
    pub v_hat: DMatrix<T>,
    pub lambda_star: T,
    pub criterion_values: Vec<T>,
    pub cv_errors: Vec<T>,
    pub lambda_grid: Vec<T>,
    pub x_mean: Option<DVector<T>>,
    pub z_mean: Option<DVector<T>>,
}

impl<T: Scalar> RankRegFit<T> {
    /// Control residuals for new data, using the stored centering.
    pub fn control_residuals(&self, x: &DMatrix<T>, z: &DMatrix<T>) -> Result<DMatrix<T>> {
        if x.ncols() != self.m_hat.nrows() || z.ncols() != self.m_hat.ncols() || x.nrows() != z.nrows() {
            return Err(dim_err("X, Z do not match the fitted first stage".to_string()));
        }
        let xc = match &self.x_mean {
            Some(m) => center_with(x, m),
            None => x.clone(),
        };
        let zc = match &self.z_mean {
            Some(m) => center_with(z, m),
            None => z.clone(),
        };
        Ok(xc - zc * self.m_hat.transpose())
    }
}

pub(crate) fn column_means<T: Scalar>(a: &DMatrix<T>) -> DVector<T> {
    let n = T::from_count(a.nrows().max(1));
    DVector::from_iterator(a.ncols(), a.column_iter().map(|c| c.sum() / n))
}

pub(crate) fn center_with<T: Scalar>(a: &DMatrix<T>, means: &DVector<T>) -> DMatrix<T> {
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    out
}

fn check_pair<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>) -> Result<()> {
    ensure_finite(x, "X")?;
    ensure_finite(z, "Z")?;
    if x.nrows() != z.nrows() {
        return Err(dim_err(format!("X has {} rows, Z has {}", x.nrows(), z.nrows())));
    }
    Ok(())
}

/// Minimizes `‖X − Z M_kᵀ‖_F² + λk` over `k ∈ {0, …, min(p, r)}`; ties go to
/// the smaller rank.
pub fn select_rank<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>, lambda: T) -> Result<RankSelection<T>> {
    check_pair(x, z)?;
    let path = ReducedRankPath::new(x, z)?;
    select_on_path(&path, x, z, lambda)
}

fn select_on_path<T: Scalar>(
    path: &ReducedRankPath<T>,
    x: &DMatrix<T>,
    z: &DMatrix<T>,
    lambda: T,
) -> Result<RankSelection<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidInput("penalty must be positive".into()));
    }
    let criterion: Vec<T> = (0..=path.max_rank())
        .map(|k| path.residual_ss(x, z, k) + lambda * T::from_count(k))
        .collect();
    let mut q_hat = 0;
    for (k, &c) in criterion.iter().enumerate() {
        if c < criterion[q_hat] {
            q_hat = k;
        }
    }
    Ok(RankSelection {
        q_hat,
        m_hat: path.coefficients(q_hat),
        criterion,
    })
}

/// Log-spaced penalties between `span.0` and `span.1` times `‖X‖_F² / min(p, r)`.
pub fn default_lambda_grid<T: Scalar>(x: &DMatrix<T>, r: usize, size: usize, span: (f64, f64)) -> Vec<T> {
    let scale = (frobenius_sq(x).as_f64() / x.ncols().min(r).max(1) as f64).max(f64::MIN_POSITIVE);
    let (lo, hi) = (span.0.ln(), span.1.ln());
    (0..size)
        .map(|i| {
            let t = if size == 1 { 0.0 } else { i as f64 / (size - 1) as f64 };
            T::lit(scale * (lo + t * (hi - lo)).exp())
        })
        .collect()
}

/// Outcome of [`cross_validate_lambda`].
#[derive(Clone, Debug)]
pub struct LambdaSelection<T: Scalar> {
    pub lambda: T,
    /// Mean held-out error per grid value, in grid order.
    pub mean_errors: Vec<T>,
    /// Standard error of each mean across folds.
    pub standard_errors: Vec<T>,
}

/// K-fold cross-validation of the penalty.
///
/// Held-out error is `‖X_val − Z_val M̂(λ)ᵀ‖_F² / n_val`, averaged over folds;
/// the penalty is then picked according to `rule`.
pub fn cross_validate_lambda<T: Scalar>(
    x: &DMatrix<T>,
    z: &DMatrix<T>,
    grid: &[T],
    folds: usize,
    seed: u64,
    center: bool,
    rule: LambdaRule,
) -> Result<LambdaSelection<T>> {
    check_pair(x, z)?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("penalty grid is empty".into()));
    }
    if grid.iter().any(|&l| !(l > T::zero())) {
        return Err(Error::InvalidInput("penalties must be positive".into()));
    }
    let n = x.nrows();
    if folds < 2 || folds > n {
        return Err(Error::InvalidInput(format!("need 2 <= folds <= n, got {folds} folds for {n} rows")));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, 0));
    let mut fold_errors = vec![Vec::with_capacity(folds); grid.len()];
    for f in 0..folds {
        let val: Vec<usize> = perm.iter().skip(f).step_by(folds).copied().collect();
        let train: Vec<usize> = perm
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds != f)
            .map(|(_, &r)| r)
            .collect();
        let (mut xt, mut zt) = (x.select_rows(&train), z.select_rows(&train));
        let (mut xv, mut zv) = (x.select_rows(&val), z.select_rows(&val));
        if center {
            let (mx, mz) = (column_means(&xt), column_means(&zt));
            xt = center_with(&xt, &mx);
            zt = center_with(&zt, &mz);
            xv = center_with(&xv, &mx);
            zv = center_with(&zv, &mz);
        }
        let path = ReducedRankPath::new(&xt, &zt)?;
        let rss: Vec<T> = (0..=path.max_rank()).map(|k| path.residual_ss(&xt, &zt, k)).collect();
        let n_val = T::from_count(val.len());
        for (g, &lambda) in grid.iter().enumerate() {
            let q = argmin_penalized(&rss, lambda);
            let resid = &xv - &zv * path.coefficients(q).transpose();
            fold_errors[g].push(frobenius_sq(&resid) / n_val);
        }
    }
    let k = T::from_count(folds);
    let mean_errors: Vec<T> = fold_errors.iter().map(|e| e.iter().fold(T::zero(), |a, &v| a + v) / k).collect();
    let standard_errors: Vec<T> = fold_errors
        .iter()
        .zip(&mean_errors)
        .map(|(e, &m)| {
            let ss = e.iter().fold(T::zero(), |a, &v| a + (v - m) * (v - m));
            (ss / (k - T::one()) / k).sqrt()
        })
        .collect();
    let mut best = 0;
    for g in 1..grid.len() {
        let tie_smaller = mean_errors[g] == mean_errors[best] && grid[g] < grid[best];
        if mean_errors[g] < mean_errors[best] || tie_smaller {
            best = g;
        }
    }
    if rule == LambdaRule::OneStandardError {
        let bound = mean_errors[best] + standard_errors[best];
        for g in 0..grid.len() {
            if mean_errors[g] <= bound && grid[g] > grid[best] {
                best = g;
            }
        }
    }
    Ok(LambdaSelection {
        lambda: grid[best],
        mean_errors,
        standard_errors,
    })
}

fn argmin_penalized<T: Scalar>(rss: &[T], lambda: T) -> usize {
    let mut best = 0;
    let mut best_val = rss[0];
    for (k, &r) in rss.iter().enumerate().skip(1) {
        let v = r + lambda * T::from_count(k);
        if v < best_val {
            best = k;
            best_val = v;
        }
    }
    best
}

/// Full first-stage fit: cross-validated penalty, selected rank, estimated
/// `M̂`, null-space basis `R̂` and control residuals `V̂`.
pub fn fit<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>, config: &RankRegConfig) -> Result<RankRegFit<T>> {
    check_pair(x, z)?;
    let (xc, zc, x_mean, z_mean) = if config.center {
        let (mx, mz) = (column_means(x), column_means(z));
        (center_with(x, &mx), center_with(z, &mz), Some(mx), Some(mz))
    } else {
        (x.clone(), z.clone(), None, None)
    };

    let grid: Vec<T> = match &config.lambda_grid {
        Some(g) => g.iter().map(|&l| T::lit(l)).collect(),
        None => default_lambda_grid(&xc, zc.ncols(), config.grid_size, config.grid_span),
    };
    let cv = if grid.len() == 1 {
        LambdaSelection {
            lambda: grid[0],
            mean_errors: Vec::new(),
            standard_errors: Vec::new(),
        }
    } else {
        cross_validate_lambda(&xc, &zc, &grid, config.folds, config.seed, false, config.rule)?
    };

    let path = ReducedRankPath::new(&xc, &zc)?;
    let sel = select_on_path(&path, &xc, &zc, cv.lambda)?;
    let r_hat = null_space_basis(&sel.m_hat, sel.q_hat)?;
    let v_hat = &xc - &zc * sel.m_hat.transpose();
    Ok(RankRegFit {
        m_hat: sel.m_hat,
        q_hat: sel.q_hat,
        r_hat,
        v_hat,
        lambda_star: cv.lambda,
        criterion_values: sel.criterion,
        cv_errors: cv.mean_errors,
        lambda_grid: grid,
        x_mean,
        z_mean,
    })
}

#[cfg(test)]
mod tests;
