use nalgebra::{DMatrix, DVector};

use super::ensure_finite;
use crate::error::{Error, Result};
use crate::Scalar;

/// Thin singular value decomposition `A = U diag(s) Vᵀ` with `s` descending.
///
/// For an `m x n` input `U` is `m x min(m, n)` and `V` is `n x min(m, n)`.
#[derive(Clone, Debug)]
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub singular_values: DVector<T>,
    pub v: DMatrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn reconstruct(&self) -> DMatrix<T> {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// Computed in `f64` and converted back to `T`.
pub fn svd<T: Scalar>(a: &DMatrix<T>) -> Result<Svd<T>> {
    ensure_finite(a, "svd input")?;
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(m, 0),
            singular_values: DVector::zeros(0),
            v: DMatrix::zeros(n, 0),
        });
    }

    let mat = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)].as_f64());
    let dec = mat
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd failed to converge: {e:?}")))?;
    let (u, v, s) = (dec.U(), dec.V(), dec.S().column_vector());

    // Singular values come back non-increasing.
    Ok(Svd {
        u: DMatrix::from_fn(m, k, |i, j| T::lit(u[(i, j)])),
        singular_values: DVector::from_fn(k, |i, _| T::lit(s[i].abs())),
        v: DMatrix::from_fn(n, k, |i, j| T::lit(v[(i, j)])),
    })
}
