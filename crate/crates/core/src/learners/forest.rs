use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_features, check_training_data, Predictor, RegressionTree, SplitParams};
use crate::error::Result;
use crate::seed::stream;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Fraction of features examined at each split (at least one).
    pub mtry_fraction: f64,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            mtry_fraction: 1.0 / 3.0,
            bootstrap: true,
        }
    }
}

/// Average of CART trees grown on bootstrap resamples.
#[derive(Clone, Debug)]
pub struct RandomForest<T: Scalar> {
    trees: Vec<RegressionTree<T>>,
    n_features: usize,
}

impl<T: Scalar> RandomForest<T> {
    /// Tree `t` draws from its own stream derived from `(seed, t)`, so the
    /// result does not depend on thread scheduling.
    pub fn fit(x: &DMatrix<T>, y: &DVector<T>, params: &ForestParams, seed: u64) -> Result<Self> {
        check_training_data(x, y)?;
        let n = y.len();
        let d = x.ncols();
        let mtry = ((params.mtry_fraction * d as f64).floor() as usize).max(1);
        let split = SplitParams {
            max_depth: params.max_depth,
            min_leaf: params.min_leaf.max(1),
            max_features: (mtry < d).then_some(mtry),
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(seed, t as u64);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit_rows(x, y, rows, &split, &mut rng)
            })
            .collect();
        Ok(Self { trees, n_features: d })
    }

    pub fn trees(&self) -> &[RegressionTree<T>] {
        &self.trees
    }
}

impl<T: Scalar> Predictor<T> for RandomForest<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        check_features(Some(self.n_features), x)?;
        let mut total = DVector::zeros(x.nrows());
        for tree in &self.trees {
            total += tree.predict(x)?;
        }
        Ok(total / T::from_count(self.trees.len()))
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.n_features)
    }
}
