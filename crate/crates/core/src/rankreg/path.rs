use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, svd};
use crate::Scalar;

/// All reduced-rank solutions of `X ≈ Z Mᵀ`, `rank(M) = 0, …, min(p, r)`.
///
/// With `B = (ZᵀZ)⁻¹ZᵀX` the OLS coefficients and `V_k` the top-`k` right
/// singular vectors of the fitted values `Z B`, the rank-`k` solution is
/// `M_kᵀ = B V_k V_kᵀ`. The singular vectors are obtained from the small
/// `r x p` matrix `Lᵀ B`, where `ZᵀZ = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct ReducedRankPath<T: Scalar> {
    ols: DMatrix<T>,
    right_vectors: DMatrix<T>,
    singular_values: Vec<T>,
}

impl<T: Scalar> ReducedRankPath<T> {
    pub fn new(x: &DMatrix<T>, z: &DMatrix<T>) -> Result<Self> {
        let r = z.ncols();
        if z.nrows() < r {
            return Err(Error::RankDeficientDesign(format!(
                "{} rows cannot identify {} exogenous coefficients",
                z.nrows(),
                r
            )));
        }
        let gram = z.transpose() * z;
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::RankDeficientDesign("ZᵀZ is singular".into()))?;
        let l = chol.l();
        let diag: Vec<T> = (0..r).map(|i| l[(i, i)]).collect();
        if r > 0 {
            let max = diag.iter().fold(T::zero(), |a, &b| a.max(b));
            let min = diag.iter().fold(max, |a, &b| a.min(b));
            if min * min <= max * max * T::rank_tolerance() {
                return Err(Error::RankDeficientDesign("ZᵀZ is numerically singular".into()));
            }
        }
        let ols = chol.solve(&(z.transpose() * x));
        let dec = svd(&(l.transpose() * &ols))?;
        Ok(Self {
            ols,
            right_vectors: dec.v,
            singular_values: dec.singular_values.iter().copied().collect(),
        })
    }

    /// Largest admissible rank, `min(p, r)`.
    pub fn max_rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Singular values of the OLS fitted values, descending.
    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }

    /// OLS coefficient matrix `B` (`r x p`).
    pub fn ols(&self) -> &DMatrix<T> {
        &self.ols
    }

    /// Rank-`k` coefficient matrix `M_k` (`p x r`). Ranks above the maximum
    /// are clamped.
    pub fn coefficients(&self, k: usize) -> DMatrix<T> {
        let k = k.min(self.max_rank());
        let vk = self.right_vectors.columns(0, k);
        &vk * (vk.transpose() * self.ols.transpose())
    }

    pub fn residual_ss(&self, x: &DMatrix<T>, z: &DMatrix<T>, k: usize) -> T {
        frobenius_sq(&(x - z * self.coefficients(k).transpose()))
    }
}

/// Rank-`k` least-squares solution of `X ≈ Z Mᵀ` (returned as `M`, `p x r`).
pub fn fit_rank_k<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>, k: usize) -> Result<DMatrix<T>> {
    if x.nrows() != z.nrows() {
        return Err(crate::error::dim_err("X and Z row counts differ".to_string()));
    }
    let path = ReducedRankPath::new(x, z)?;
    if k > path.max_rank() {
        return Err(crate::error::dim_err(format!(
            "rank {k} exceeds min(p, r) = {}",
            path.max_rank()
        )));
    }
    Ok(path.coefficients(k))
}
