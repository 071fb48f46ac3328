//! Regressors plugged into every stage of the estimator.
//!
//! All learners fit an intercept (trees through their leaf means, linear
//! models through an explicit constant) and are deterministic given their
//! seed.

mod boost;
mod constant;
mod forest;
mod linear;
mod tree;

pub use boost::{BoostParams, GradientBoosting};
pub use constant::{fit_constant, ConstantModel};
pub use forest::{ForestParams, RandomForest};
pub use linear::{fit_ols, fit_ridge, LinearModel};
pub use tree::{RegressionTree, SplitParams, TreeParams};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::ensure_finite;
use crate::seed::stream;
use crate::Scalar;

/// A fitted model that maps feature rows to predictions.
pub trait Predictor<T: Scalar> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>>;

    /// Feature count the model was trained on, if it depends on features.
    fn n_features(&self) -> Option<usize>;
}

/// A regression method: turns `(features, targets)` into a [`Predictor`].
pub trait Regressor<T: Scalar> {
    type Model: Predictor<T>;

    fn fit(&self, x: &DMatrix<T>, y: &DVector<T>) -> Result<Self::Model>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeParams {
    pub alpha: f64,
}

/// Which regressor to use and its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerKind {
    Constant,
    Ols,
    Ridge(RidgeParams),
    Tree(TreeParams),
    Forest(ForestParams),
    Boost(BoostParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    #[serde(flatten)]
    pub kind: LearnerKind,
    #[serde(default)]
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(kind: LearnerKind) -> Self {
        Self { kind, seed: 0 }
    }

    pub fn constant() -> Self {
        Self::new(LearnerKind::Constant)
    }

    pub fn ols() -> Self {
        Self::new(LearnerKind::Ols)
    }

    pub fn ridge(alpha: f64) -> Self {
        Self::new(LearnerKind::Ridge(RidgeParams { alpha }))
    }

    pub fn tree(params: TreeParams) -> Self {
        Self::new(LearnerKind::Tree(params))
    }

    /// Random forest of fully grown trees.
    pub fn forest(n_trees: usize) -> Self {
        Self::new(LearnerKind::Forest(ForestParams {
            n_trees,
            ..ForestParams::default()
        }))
    }

    pub fn boost(params: BoostParams) -> Self {
        Self::new(LearnerKind::Boost(params))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        match &self.kind {
            LearnerKind::Constant | LearnerKind::Ols => Ok(()),
            LearnerKind::Ridge(r) if !(r.alpha > 0.0) => bad("ridge alpha must be positive"),
            LearnerKind::Tree(t) if t.min_leaf == 0 || t.max_depth == Some(0) => {
                bad("tree needs min_leaf >= 1 and max_depth >= 1")
            }
            LearnerKind::Forest(f)
                if f.n_trees == 0 || f.min_leaf == 0 || !(f.mtry_fraction > 0.0 && f.mtry_fraction <= 1.0) =>
            {
                bad("forest needs n_trees >= 1, min_leaf >= 1 and mtry_fraction in (0, 1]")
            }
            LearnerKind::Boost(b)
                if b.n_rounds == 0 || b.min_leaf == 0 || !(b.learning_rate > 0.0 && b.learning_rate <= 1.0) =>
            {
                bad("boosting needs n_rounds >= 1, min_leaf >= 1 and learning_rate in (0, 1]")
            }
            _ => Ok(()),
        }
    }
}

/// Any fitted learner.
#[derive(Clone, Debug)]
pub enum FittedModel<T: Scalar> {
    Constant(ConstantModel<T>),
    Linear(LinearModel<T>),
    Tree(RegressionTree<T>),
    Forest(RandomForest<T>),
    Boost(GradientBoosting<T>),
}

impl<T: Scalar> Predictor<T> for FittedModel<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        match self {
            FittedModel::Constant(m) => m.predict(x),
            FittedModel::Linear(m) => m.predict(x),
            FittedModel::Tree(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Boost(m) => m.predict(x),
        }
    }

    fn n_features(&self) -> Option<usize> {
        match self {
            FittedModel::Constant(m) => m.n_features(),
            FittedModel::Linear(m) => m.n_features(),
            FittedModel::Tree(m) => m.n_features(),
            FittedModel::Forest(m) => m.n_features(),
            FittedModel::Boost(m) => m.n_features(),
        }
    }
}

impl<T: Scalar> Regressor<T> for LearnerConfig {
    type Model = FittedModel<T>;

    fn fit(&self, x: &DMatrix<T>, y: &DVector<T>) -> Result<FittedModel<T>> {
        self.validate()?;
        check_training_data(x, y)?;
        Ok(match &self.kind {
            LearnerKind::Constant => {
                let mut m = fit_constant(y)?;
                m.set_n_features(x.ncols());
                FittedModel::Constant(m)
            }
            LearnerKind::Ols => FittedModel::Linear(fit_ols(x, y)?),
            LearnerKind::Ridge(r) => FittedModel::Linear(fit_ridge(x, y, T::lit(r.alpha))?),
            LearnerKind::Tree(t) => {
                let split = SplitParams::from(*t);
                FittedModel::Tree(RegressionTree::fit(x, y, &split, &mut stream(self.seed, 0))?)
            }
            LearnerKind::Forest(f) => FittedModel::Forest(RandomForest::fit(x, y, f, self.seed)?),
            LearnerKind::Boost(b) => FittedModel::Boost(GradientBoosting::fit(x, y, b, self.seed)?),
        })
    }
}

pub(crate) fn check_training_data<T: Scalar>(x: &DMatrix<T>, y: &DVector<T>) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Empty("no training rows".into()));
    }
    if x.nrows() != y.len() {
        return Err(dim_err(format!("{} feature rows for {} targets", x.nrows(), y.len())));
    }
    ensure_finite(x, "features")?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("targets contain non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn check_features(expected: Option<usize>, x: &DMatrix<impl Scalar>) -> Result<()> {
    match expected {
        Some(d) if d != x.ncols() => Err(dim_err(format!("model expects {d} features, got {}", x.ncols()))),
        _ => Ok(()),
    }
}

/// Mean squared difference between two equally long vectors.
pub fn mse<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    let diff = a - b;
    diff.dot(&diff) / T::from_count(a.len())
}

#[cfg(test)]
mod tests;
