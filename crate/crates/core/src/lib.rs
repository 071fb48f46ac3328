//! Boosted control function (BCF) estimation.
//!
//! The crate covers the whole estimation pipeline for simultaneous equation
//! models with an exogenous shift variable `Z`:
//!
//! * [`simdg`] samples structural functions, low-rank first-stage matrices and
//!   confounded Gaussian noise, and draws datasets under shifted distributions.
//! * [`rankreg`] estimates the first stage `X = M Z + V` by reduced-rank
//!   regression with a penalized rank-selection criterion.
//! * [`learners`] provides the regressors (constant, linear, ridge, CART,
//!   random forest, gradient boosting) plugged into the second stage.
//! * [`bcf`] implements ControlTwicing, the null-space regression and the
//!   assembled invariant predictor, together with closed-form oracles for
//!   the Gaussian case.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod bcf;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod rankreg;
pub mod scalar;
pub mod seed;
pub mod simdg;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense `f64` matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense `f64` column vector.
pub type Vector = nalgebra::DVector<f64>;

pub type OrthonormalBasis = linalg::OrthonormalBasis<f64>;
pub type NullSpace = linalg::NullSpace<f64>;
pub type TreeFunction = simdg::TreeFunction<f64>;
pub type StructuralFunction = simdg::StructuralFunction<f64>;
pub type GaussianNoiseSpec = simdg::GaussianNoiseSpec<f64>;
pub type SimdgSpec = simdg::SimdgSpec<f64>;
pub type Dataset = simdg::Dataset<f64>;
pub type RankRegFit = rankreg::RankRegFit<f64>;
pub type FittedModel = learners::FittedModel<f64>;
pub type BcfModel = bcf::BcfModel<f64>;
pub type ImpOracle = bcf::ImpOracle<f64>;
