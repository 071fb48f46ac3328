//! Simultaneous equation models with an exogenous shift variable.
//!
//! A model is the tuple `(f0, M0, Λ0, Q)`: data are drawn as `Z ~ Q`,
//! `(U, V) ~ Λ0` independent of `Z`, `X = M0 Z + V` and `Y = f0(X) + U`.
//! Training uses `Q = N(0, I_r)`; shifted test distributions use
//! `Q = N(0, k² I_r)`.

mod categorical;
mod dataset;
mod noise;
mod spec;
mod tree;

pub use categorical::{encode_categorical, CategoricalEncoding};
pub use dataset::Dataset;
pub use noise::{sample_noise_spec, GaussianNoiseSpec};
pub use spec::{sample_m0, SimdgParams, SimdgSpec};
pub use tree::{sample_tree_function, StructuralFunction, TreeFunction};
