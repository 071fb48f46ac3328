use nalgebra::{DMatrix, DVector};

use super::{check_features, check_training_data, Predictor};
use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::rankreg::{center_with, column_means};
use crate::Scalar;

/// `x ↦ βᵀx + β₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel<T: Scalar> {
    pub coefficients: DVector<T>,
    pub intercept: T,
}

impl<T: Scalar> Predictor<T> for LinearModel<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        check_features(Some(self.coefficients.len()), x)?;
        Ok((x * &self.coefficients).add_scalar(self.intercept))
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.coefficients.len())
    }
}

fn centered<T: Scalar>(x: &DMatrix<T>, y: &DVector<T>) -> (DMatrix<T>, DVector<T>, DVector<T>, T) {
    let mx = column_means(x);
    let my = y.sum() / T::from_count(y.len());
    (center_with(x, &mx), y.add_scalar(-my), mx, my)
}

/// Least squares with intercept; the minimum-norm solution when the centered
/// design is rank deficient.
pub fn fit_ols<T: Scalar>(x: &DMatrix<T>, y: &DVector<T>) -> Result<LinearModel<T>> {
    check_training_data(x, y)?;
    let (xc, yc, mx, my) = centered(x, y);
    let d = x.ncols();
    let coefficients = if d == 0 {
        DVector::zeros(0)
    } else {
        let dec = svd(&xc)?;
        let s = &dec.singular_values;
        let cut = if s.is_empty() { T::zero() } else { s[0] * T::rank_tolerance() };
        let uty = dec.u.transpose() * &yc;
        let mut scaled = DVector::zeros(s.len());
        for i in 0..s.len() {
            if s[i] > cut && s[i] > T::zero() {
                scaled[i] = uty[i] / s[i];
            }
        }
        &dec.v * scaled
    };
    let intercept = my - mx.dot(&coefficients);
    Ok(LinearModel {
        coefficients,
        intercept,
    })
}

/// Ridge regression; the penalty `alpha·‖β‖²` excludes the intercept.
pub fn fit_ridge<T: Scalar>(x: &DMatrix<T>, y: &DVector<T>, alpha: T) -> Result<LinearModel<T>> {
    check_training_data(x, y)?;
    if !(alpha > T::zero()) {
        return Err(Error::InvalidInput("ridge alpha must be positive".into()));
    }
    let (xc, yc, mx, my) = centered(x, y);
    let d = x.ncols();
    let gram = xc.transpose() * &xc + DMatrix::identity(d, d) * alpha;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("ridge system is not positive definite".into()))?;
    let coefficients = chol.solve(&(xc.transpose() * yc));
    let intercept = my - mx.dot(&coefficients);
    Ok(LinearModel {
        coefficients,
        intercept,
    })
}
