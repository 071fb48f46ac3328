use nalgebra::{DMatrix, DVector};

use super::{check_features, Predictor};
use crate::error::{Error, Result};
use crate::Scalar;

/// Predicts the training mean everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantModel<T: Scalar> {
    value: T,
    n_features: Option<usize>,
}

impl<T: Scalar> ConstantModel<T> {
    pub fn new(value: T) -> Self {
        Self { value, n_features: None }
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub(crate) fn set_n_features(&mut self, d: usize) {
        self.n_features = Some(d);
    }
}

pub fn fit_constant<T: Scalar>(y: &DVector<T>) -> Result<ConstantModel<T>> {
    if y.is_empty() {
        return Err(Error::Empty("cannot take the mean of no targets".into()));
    }
    Ok(ConstantModel::new(y.sum() / T::from_count(y.len())))
}

impl<T: Scalar> Predictor<T> for ConstantModel<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        check_features(self.n_features, x)?;
        Ok(DVector::from_element(x.nrows(), self.value))
    }

    fn n_features(&self) -> Option<usize> {
        self.n_features
    }
}
