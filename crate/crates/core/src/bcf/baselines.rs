use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::learners::{fit_constant, ConstantModel, FittedModel, LearnerConfig, Predictor, Regressor};
use crate::simdg::{Dataset, SimdgSpec, StructuralFunction};
use crate::Scalar;

/// Regression of `Y` on `X` alone.
pub fn fit_ls<T: Scalar>(data: &Dataset<T>, learner: &LearnerConfig) -> Result<FittedModel<T>> {
    learner.fit(data.x(), data.y())
}

/// The training mean of `Y`.
pub fn fit_constant_baseline<T: Scalar>(data: &Dataset<T>) -> Result<ConstantModel<T>> {
    fit_constant(data.y())
}

/// Predicts with the true structural function.
#[derive(Clone, Debug)]
pub struct StructuralOracle<T: Scalar> {
    f0: StructuralFunction<T>,
}

pub fn structural_oracle<T: Scalar>(spec: &SimdgSpec<T>) -> StructuralOracle<T> {
    StructuralOracle { f0: spec.f0().clone() }
}

impl<T: Scalar> Predictor<T> for StructuralOracle<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        self.f0.evaluate(x)
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.f0.input_dim())
    }
}
