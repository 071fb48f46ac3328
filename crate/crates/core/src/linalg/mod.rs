//! Dense linear-algebra primitives: SVD, Haar sampling, null-space bases,
//! projections and subspace distances.

mod basis;
mod decompose;
mod subspace;

pub use basis::{haar_orthonormal, null_space_basis, NullSpace, OrthonormalBasis};
pub use decompose::{svd, Svd};
pub use subspace::{
    column_space_projection, inverse_shifted_covariance, limit_inverse_shifted_covariance,
    numerical_rank, projection_matrix, subspace_distance,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

pub(crate) fn ensure_finite<T: Scalar>(a: &DMatrix<T>, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} contains non-finite entries")))
    }
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs<T: Scalar>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Squared Frobenius norm.
pub fn frobenius_sq<T: Scalar>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, &v| acc + v * v)
}
