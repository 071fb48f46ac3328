use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::learners::{mse, FittedModel, LearnerConfig, Predictor, Regressor};
use crate::Scalar;

/// Which block is refit first in every round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwicingOrder {
    /// `γ̂` on `V̂`, then `f̂` on `X`.
    #[default]
    ControlFirst,
    /// `f̂` on `X`, then `γ̂` on `V̂`.
    StructuralFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwicingConfig {
    pub rounds: usize,
    /// Stop once the in-sample MSE of `f̂(X) + γ̂(V̂)` moves by less than this.
    pub tol: f64,
    pub order: TwicingOrder,
}

impl Default for TwicingConfig {
    fn default() -> Self {
        Self {
            rounds: 10,
            tol: 1e-6,
            order: TwicingOrder::ControlFirst,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwicingFit<T: Scalar> {
    pub f_hat: FittedModel<T>,
    pub gamma_hat: FittedModel<T>,
    pub rounds_run: usize,
    /// In-sample MSE after each round.
    pub mse_trace: Vec<T>,
}

/// Alternating fit of `Y ≈ f(X) + γ(V̂)`.
pub fn control_twicing<T: Scalar>(
    x: &DMatrix<T>,
    y: &DVector<T>,
    v_hat: &DMatrix<T>,
    learner_f: &LearnerConfig,
    learner_gamma: &LearnerConfig,
    config: &TwicingConfig,
) -> Result<TwicingFit<T>> {
    if x.nrows() != y.len() || v_hat.nrows() != y.len() {
        return Err(dim_err(format!(
            "X has {} rows, V̂ {}, Y {}",
            x.nrows(),
            v_hat.nrows(),
            y.len()
        )));
    }
    if config.rounds == 0 {
        return Err(Error::InvalidInput("ControlTwicing needs at least one round".into()));
    }
    if y.is_empty() {
        return Err(Error::Empty("no training rows".into()));
    }
    let tol = T::lit(config.tol);
    let y_bar = y.sum() / T::from_count(y.len());
    let mut target = y.add_scalar(-y_bar);
    let mut trace = Vec::with_capacity(config.rounds);
    let mut models: Option<(FittedModel<T>, FittedModel<T>)> = None;

    for _ in 0..config.rounds {
        let (f_hat, gamma_hat, f_fit, g_fit) = match config.order {
            TwicingOrder::ControlFirst => {
                let gamma_hat = learner_gamma.fit(v_hat, &target)?;
                let g_fit = gamma_hat.predict(v_hat)?;
                let f_hat = learner_f.fit(x, &(y - &g_fit))?;
                let f_fit = f_hat.predict(x)?;
                target = y - &f_fit;
                (f_hat, gamma_hat, f_fit, g_fit)
            }
            TwicingOrder::StructuralFirst => {
                let f_hat = learner_f.fit(x, &target)?;
                let f_fit = f_hat.predict(x)?;
                let gamma_hat = learner_gamma.fit(v_hat, &(y - &f_fit))?;
                let g_fit = gamma_hat.predict(v_hat)?;
                target = y - &g_fit;
                (f_hat, gamma_hat, f_fit, g_fit)
            }
        };
        let current = mse(&(f_fit + g_fit), y);
        let converged = trace.last().is_some_and(|&prev: &T| (prev - current).abs() < tol);
        trace.push(current);
        models = Some((f_hat, gamma_hat));
        if converged {
            break;
        }
    }

    let (f_hat, gamma_hat) = models.expect("at least one round ran");
    Ok(TwicingFit {
        f_hat,
        gamma_hat,
        rounds_run: trace.len(),
        mse_trace: trace,
    })
}
