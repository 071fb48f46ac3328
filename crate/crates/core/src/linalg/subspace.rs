use nalgebra::DMatrix;

use super::{basis::NullSpace, ensure_finite, frobenius_sq, svd, OrthonormalBasis};
use crate::error::{dim_err, Error, Result};
use crate::Scalar;

/// `B Bᵀ` for an orthonormal basis `B`.
pub fn projection_matrix<T: Scalar>(b: &OrthonormalBasis<T>) -> DMatrix<T> {
    b.matrix() * b.matrix().transpose()
}

/// Number of singular values above `rank_tolerance · s_max`.
pub fn numerical_rank<T: Scalar>(a: &DMatrix<T>) -> Result<usize> {
    let dec = svd(a)?;
    let s = &dec.singular_values;
    if s.is_empty() || s[0] == T::zero() {
        return Ok(0);
    }
    let cut = s[0] * T::rank_tolerance();
    Ok(s.iter().filter(|&&v| v > cut).count())
}

/// Orthogonal projector onto the column space of `a`.
pub fn column_space_projection<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let rank = numerical_rank(a)?;
    let d = a.nrows();
    if rank == 0 {
        return Ok(DMatrix::zeros(d, d));
    }
    let dec = svd(a)?;
    let u = dec.u.columns(0, rank);
    Ok(&u * u.transpose())
}

/// `‖Π_col(A) − Π_col(B)‖_F²`.
pub fn subspace_distance<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<T> {
    if a.nrows() != b.nrows() {
        return Err(dim_err(format!(
            "row counts differ: {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let diff = column_space_projection(a)? - column_space_projection(b)?;
    Ok(frobenius_sq(&diff))
}

/// `(k² M Mᵀ + Σ)⁻¹`, the precision of `X = M Z + V` under `Z ~ N(0, k² I)`
/// and `Cov(V) = Σ`.
pub fn inverse_shifted_covariance<T: Scalar>(
    m0: &DMatrix<T>,
    sigma: &DMatrix<T>,
    k: T,
) -> Result<DMatrix<T>> {
    ensure_finite(m0, "M0")?;
    ensure_finite(sigma, "Sigma")?;
    let p = m0.nrows();
    if sigma.shape() != (p, p) {
        return Err(dim_err(format!(
            "Sigma must be {p}x{p}, got {:?}",
            sigma.shape()
        )));
    }
    if k <= T::zero() {
        return Err(Error::InvalidInput("shift strength must be positive".into()));
    }
    let b = m0 * m0.transpose() * (k * k) + sigma;
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::Numerical("shifted covariance is not positive definite".into()))?;
    Ok(chol.inverse())
}

/// `R (Rᵀ Σ R)⁻¹ Rᵀ`, the limit of [`inverse_shifted_covariance`] as `k → ∞`.
/// Zero for the zero map.
pub fn limit_inverse_shifted_covariance<T: Scalar>(
    null_space: &NullSpace<T>,
    sigma: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let p = null_space.ambient_dim();
    if sigma.shape() != (p, p) {
        return Err(dim_err(format!(
            "Sigma must be {p}x{p}, got {:?}",
            sigma.shape()
        )));
    }
    match null_space.basis() {
        None => Ok(DMatrix::zeros(p, p)),
        Some(b) => {
            let r = b.matrix();
            let inner = r.transpose() * sigma * r;
            let inv = inner.cholesky().ok_or_else(|| {
                Error::Numerical("RᵀΣR is not positive definite".into())
            })?;
            Ok(r * inv.inverse() * r.transpose())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::null_space_basis;

    #[test]
    fn projection_examples() {
        let e1 = OrthonormalBasis::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), 1e-12).unwrap();
        assert_eq!(projection_matrix(&e1), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let id = OrthonormalBasis::<f64>::identity(3);
        assert_eq!(projection_matrix(&id), DMatrix::identity(3, 3));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = OrthonormalBasis::new(DMatrix::from_column_slice(2, 1, &[s, -s]), 1e-12).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((projection_matrix(&d) - expected).abs().max() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let e1 = DMatrix::<f64>::from_column_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert_eq!(subspace_distance(&e1, &e1).unwrap(), 0.0);
        assert!((subspace_distance(&e1, &e2).unwrap() - 2.0).abs() < 1e-14);

        // A spans the same plane as B with a different parametrization.
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let a = DMatrix::from_row_slice(3, 2, &[2.0, 1.0, -1.0, 3.0, 0.0, 0.0]);
        assert!(subspace_distance(&a, &b).unwrap() < 1e-20);

        let tall = DMatrix::<f64>::zeros(3, 1);
        assert!(matches!(subspace_distance(&e1, &tall), Err(Error::Dimension(_))));
    }

    #[test]
    fn zero_matrix_distance_is_projector_norm() {
        let zero = DMatrix::<f64>::zeros(3, 2);
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 2.0]);
        assert!((subspace_distance(&zero, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_inverse_axis_example() {
        let m0 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let sigma = DMatrix::<f64>::identity(2, 2);
        let k = 100.0;
        let inv = inverse_shifted_covariance(&m0, &sigma, k).unwrap();
        assert!((inv[(0, 0)] - 1.0 / (k * k + 1.0)).abs() < 1e-15);
        assert!((inv[(1, 1)] - 1.0).abs() < 1e-14);

        let ns = null_space_basis(&m0, 1).unwrap();
        let lim = limit_inverse_shifted_covariance(&ns, &sigma).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!((lim - expected).abs().max() < 1e-14);
    }

    #[test]
    fn shifted_inverse_full_rank_limit_is_zero() {
        let m0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let sigma = DMatrix::<f64>::identity(2, 2);
        let ns = null_space_basis(&m0, 2).unwrap();
        assert_eq!(limit_inverse_shifted_covariance(&ns, &sigma).unwrap(), DMatrix::zeros(2, 2));
        let inv = inverse_shifted_covariance(&m0, &sigma, 1e4).unwrap();
        assert!(inv.abs().max() < 1e-6);
    }

    #[test]
    fn shifted_inverse_is_an_inverse() {
        let m0 = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, -0.3, 0.5, 0.0, 1.0]);
        let sigma = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let k = 10.0;
        let inv = inverse_shifted_covariance(&m0, &sigma, k).unwrap();
        let b = &m0 * m0.transpose() * (k * k) + &sigma;
        let err = (&b * &inv - DMatrix::identity(3, 3)).norm();
        assert!(err < 1e-8);
        assert!(inverse_shifted_covariance(&m0, &sigma, 0.0).is_err());
    }
}
