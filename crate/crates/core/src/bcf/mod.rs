//! The invariant predictor: ControlTwicing, the null-space regression `δ̂`,
//! the assembled model and closed-form oracles for Gaussian noise.

mod baselines;
mod model;
mod oracle;
mod twicing;

pub use baselines::{fit_constant_baseline, fit_ls, structural_oracle, StructuralOracle};
pub use model::{fit_bcf, fit_delta, BcfConfig, BcfModel, DeltaModel, PredictionParts};
pub use oracle::{risk_decomposition_check, ImpOracle, RiskCheck};
pub use twicing::{control_twicing, TwicingConfig, TwicingFit, TwicingOrder};
