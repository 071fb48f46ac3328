use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_features, check_training_data, mse, Predictor, RegressionTree, SplitParams};
use crate::error::{Error, Result};
use crate::seed::stream;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_rounds: 500,
            learning_rate: 0.05,
            max_depth: 6,
            min_leaf: 1,
        }
    }
}

/// Stagewise least-squares boosting: `F_0 = mean(y)`, then each round fits a
/// tree to the current residuals and adds `learning_rate` times its fit.
#[derive(Clone, Debug)]
pub struct GradientBoosting<T: Scalar> {
    base: T,
    learning_rate: T,
    trees: Vec<RegressionTree<T>>,
    train_mse: Vec<T>,
    n_features: usize,
}

impl<T: Scalar> GradientBoosting<T> {
    pub fn fit(x: &DMatrix<T>, y: &DVector<T>, params: &BoostParams, seed: u64) -> Result<Self> {
        check_training_data(x, y)?;
        if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) || params.n_rounds == 0 {
            return Err(Error::InvalidInput(
                "boosting needs learning_rate in (0, 1] and at least one round".into(),
            ));
        }
        let lr = T::lit(params.learning_rate);
        let split = SplitParams {
            max_depth: Some(params.max_depth.max(1)),
            min_leaf: params.min_leaf.max(1),
            max_features: None,
        };
        let base = y.sum() / T::from_count(y.len());
        let mut fitted = DVector::from_element(y.len(), base);
        let mut train_mse = vec![mse(y, &fitted)];
        let mut trees = Vec::with_capacity(params.n_rounds);
        for t in 0..params.n_rounds {
            let residual = y - &fitted;
            let tree = RegressionTree::fit(x, &residual, &split, &mut stream(seed, t as u64))?;
            fitted += tree.predict(x)? * lr;
            train_mse.push(mse(y, &fitted));
            trees.push(tree);
        }
        Ok(Self {
            base,
            learning_rate: lr,
            trees,
            train_mse,
            n_features: x.ncols(),
        })
    }

    /// Training MSE before the first round and after each round.
    pub fn train_mse(&self) -> &[T] {
        &self.train_mse
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }
}

impl<T: Scalar> Predictor<T> for GradientBoosting<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        check_features(Some(self.n_features), x)?;
        let mut out = DVector::from_element(x.nrows(), self.base);
        for tree in &self.trees {
            out += tree.predict(x)? * self.learning_rate;
        }
        Ok(out)
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.n_features)
    }
}
