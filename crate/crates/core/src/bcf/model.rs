use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::twicing::{control_twicing, TwicingConfig, TwicingOrder};
use crate::error::{dim_err, Result};
use crate::learners::{FittedModel, LearnerConfig, Predictor, Regressor};
use crate::linalg::NullSpace;
use crate::rankreg::{self, center_with, column_means, RankRegConfig, RankRegFit};
use crate::simdg::Dataset;
use crate::Scalar;

/// End-to-end estimator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BcfConfig {
    pub rankreg: RankRegConfig,
    pub learner_f: LearnerConfig,
    pub learner_gamma: LearnerConfig,
    /// Defaults to `learner_f` when absent.
    pub learner_delta: Option<LearnerConfig>,
    pub rounds: usize,
    pub tol: f64,
    pub order: TwicingOrder,
}

impl Default for BcfConfig {
    fn default() -> Self {
        let twicing = TwicingConfig::default();
        Self {
            rankreg: RankRegConfig::default(),
            learner_f: LearnerConfig::forest(100),
            learner_gamma: LearnerConfig::ols(),
            learner_delta: None,
            rounds: twicing.rounds,
            tol: twicing.tol,
            order: twicing.order,
        }
    }
}

impl BcfConfig {
    /// All three regressions linear.
    pub fn linear() -> Self {
        Self {
            learner_f: LearnerConfig::ols(),
            ..Self::default()
        }
    }

    pub fn twicing(&self) -> TwicingConfig {
        TwicingConfig {
            rounds: self.rounds,
            tol: self.tol,
            order: self.order,
        }
    }

    pub fn delta_learner(&self) -> &LearnerConfig {
        self.learner_delta.as_ref().unwrap_or(&self.learner_f)
    }
}

/// The regression of `γ̂(V̂)` on the invariant coordinates.
#[derive(Clone, Debug)]
pub enum DeltaModel<T: Scalar> {
    /// Used when `R̂` is the zero map.
    Constant(T),
    Fitted(FittedModel<T>),
}

impl<T: Scalar> DeltaModel<T> {
    /// Evaluates on invariant coordinates, or on `rows` copies of the
    /// constant when there are none.
    fn evaluate(&self, coords: Option<&DMatrix<T>>, rows: usize) -> Result<DVector<T>> {
        match (self, coords) {
            (DeltaModel::Constant(c), _) => Ok(DVector::from_element(rows, *c)),
            (DeltaModel::Fitted(m), Some(c)) => m.predict(c),
            (DeltaModel::Fitted(_), None) => Err(dim_err("fitted δ̂ needs invariant coordinates")),
        }
    }
}

/// Fits `δ̂` by regressing `gamma_values` on `X R̂`.
pub fn fit_delta<T: Scalar>(
    gamma_values: &DVector<T>,
    x: &DMatrix<T>,
    r_hat: &NullSpace<T>,
    learner: &LearnerConfig,
) -> Result<DeltaModel<T>> {
    if gamma_values.len() != x.nrows() {
        return Err(dim_err(format!(
            "{} control values for {} rows",
            gamma_values.len(),
            x.nrows()
        )));
    }
    match r_hat.coordinates(x)? {
        None => {
            let n = T::from_count(gamma_values.len().max(1));
            Ok(DeltaModel::Constant(gamma_values.sum() / n))
        }
        Some(coords) => Ok(DeltaModel::Fitted(learner.fit(&coords, gamma_values)?)),
    }
}

/// The three additive pieces of a prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionParts<T: Scalar> {
    pub structural: DVector<T>,
    pub invariant_control: DVector<T>,
    pub offset: T,
}

impl<T: Scalar> PredictionParts<T> {
    pub fn total(&self) -> DVector<T> {
        (&self.structural + &self.invariant_control).add_scalar(self.offset)
    }
}

/// Fitted estimator `x ↦ f̂(x − x̄) + δ̂(R̂ᵀ(x − x̄)) + ȳ`.
///
/// Holds no exogenous data; prediction uses `X` only.
#[derive(Clone, Debug)]
pub struct BcfModel<T: Scalar> {
    f_hat: FittedModel<T>,
    gamma_hat: FittedModel<T>,
    delta_hat: DeltaModel<T>,
    rank_fit: RankRegFit<T>,
    mean_x: DVector<T>,
    mean_z: DVector<T>,
    mean_y: T,
    rounds_run: usize,
    mse_trace: Vec<T>,
}

impl<T: Scalar> BcfModel<T> {
    pub fn f_hat(&self) -> &FittedModel<T> {
        &self.f_hat
    }

    /// Control function estimate on the centered residual scale.
    pub fn gamma_hat(&self) -> &FittedModel<T> {
        &self.gamma_hat
    }

    pub fn delta_hat(&self) -> &DeltaModel<T> {
        &self.delta_hat
    }

    pub fn rank_fit(&self) -> &RankRegFit<T> {
        &self.rank_fit
    }

    pub fn q_hat(&self) -> usize {
        self.rank_fit.q_hat
    }

    pub fn mean_x(&self) -> &DVector<T> {
        &self.mean_x
    }

    pub fn mean_z(&self) -> &DVector<T> {
        &self.mean_z
    }

    pub fn mean_y(&self) -> T {
        self.mean_y
    }

    pub fn rounds_run(&self) -> usize {
        self.rounds_run
    }

    pub fn mse_trace(&self) -> &[T] {
        &self.mse_trace
    }

    pub fn predict_components(&self, x: &DMatrix<T>) -> Result<PredictionParts<T>> {
        if x.ncols() != self.mean_x.len() {
            return Err(dim_err(format!(
                "model expects {} features, got {}",
                self.mean_x.len(),
                x.ncols()
            )));
        }
        let xc = center_with(x, &self.mean_x);
        let structural = self.f_hat.predict(&xc)?;
        let coords = self.rank_fit.r_hat.coordinates(&xc)?;
        let invariant_control = self.delta_hat.evaluate(coords.as_ref(), x.nrows())?;
        Ok(PredictionParts {
            structural,
            invariant_control,
            offset: self.mean_y,
        })
    }

    pub fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        Ok(self.predict_components(x)?.total())
    }
}

impl<T: Scalar> Predictor<T> for BcfModel<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        BcfModel::predict(self, x)
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.mean_x.len())
    }
}

/// Centers the data, fits the first stage, runs ControlTwicing and fits `δ̂`.
pub fn fit_bcf<T: Scalar>(data: &Dataset<T>, config: &BcfConfig) -> Result<BcfModel<T>> {
    let (n, p, r) = (data.n(), data.p(), data.r());
    if n <= p + r {
        warn!("only {n} rows for {p} covariates and {r} exogenous variables");
    }
    let mean_x = column_means(data.x());
    let mean_z = column_means(data.z());
    let mean_y = data.y().sum() / T::from_count(n.max(1));
    let xc = center_with(data.x(), &mean_x);
    let zc = center_with(data.z(), &mean_z);
    let yc = data.y().add_scalar(-mean_y);

    let rr_config = RankRegConfig {
        center: false,
        ..config.rankreg.clone()
    };
    let mut rank_fit = rankreg::fit(&xc, &zc, &rr_config)?;
    rank_fit.x_mean = Some(mean_x.clone());
    rank_fit.z_mean = Some(mean_z.clone());

    let tw = control_twicing(
        &xc,
        &yc,
        &rank_fit.v_hat,
        &config.learner_f,
        &config.learner_gamma,
        &config.twicing(),
    )?;
    let gamma_values = tw.gamma_hat.predict(&rank_fit.v_hat)?;
    let delta_hat = fit_delta(&gamma_values, &xc, &rank_fit.r_hat, config.delta_learner())?;

    Ok(BcfModel {
        f_hat: tw.f_hat,
        gamma_hat: tw.gamma_hat,
        delta_hat,
        rank_fit,
        mean_x,
        mean_z,
        mean_y,
        rounds_run: tw.rounds_run,
        mse_trace: tw.mse_trace,
    })
}
