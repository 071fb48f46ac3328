use nalgebra::DMatrix;
use rand::Rng;

use super::{ensure_finite, max_abs, svd};
use crate::error::{dim_err, Error, Result};
use crate::Scalar;

/// A `d x m` matrix (`m <= d`) whose columns are orthonormal.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis<T: Scalar> {
    columns: DMatrix<T>,
}

impl<T: Scalar> OrthonormalBasis<T> {
    /// Wraps `columns` after checking `‖BᵀB − I‖_max <= tol`.
    pub fn new(columns: DMatrix<T>, tol: T) -> Result<Self> {
        ensure_finite(&columns, "basis")?;
        if columns.ncols() > columns.nrows() {
            return Err(dim_err(format!(
                "{} orthonormal columns cannot live in dimension {}",
                columns.ncols(),
                columns.nrows()
            )));
        }
        let m = columns.ncols();
        let gram = columns.transpose() * &columns - DMatrix::identity(m, m);
        if max_abs(&gram) > tol {
            return Err(Error::InvalidInput("columns are not orthonormal".into()));
        }
        Ok(Self { columns })
    }

    pub(crate) fn new_unchecked(columns: DMatrix<T>) -> Self {
        Self { columns }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            columns: DMatrix::identity(d, d),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.columns
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.columns
    }

    /// Ambient dimension `d`.
    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    /// Number of basis vectors `m`.
    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    /// `‖BᵀB − I‖_max`.
    pub fn orthonormality_error(&self) -> T {
        let m = self.len();
        max_abs(&(self.columns.transpose() * &self.columns - DMatrix::identity(m, m)))
    }
}

/// Basis of `ker(Mᵀ)`, or the zero map when `M` has full row rank.
///
/// The two cases are kept apart so callers branch explicitly on `q = p`.
#[derive(Clone, Debug, PartialEq)]
pub enum NullSpace<T: Scalar> {
    Basis(OrthonormalBasis<T>),
    ZeroMap { dim: usize },
}

impl<T: Scalar> NullSpace<T> {
    pub fn ambient_dim(&self) -> usize {
        match self {
            NullSpace::Basis(b) => b.ambient_dim(),
            NullSpace::ZeroMap { dim } => *dim,
        }
    }

    /// Dimension of the invariant subspace (`p − q`); zero for the zero map.
    pub fn dim(&self) -> usize {
        match self {
            NullSpace::Basis(b) => b.len(),
            NullSpace::ZeroMap { .. } => 0,
        }
    }

    pub fn is_zero_map(&self) -> bool {
        matches!(self, NullSpace::ZeroMap { .. })
    }

    pub fn basis(&self) -> Option<&OrthonormalBasis<T>> {
        match self {
            NullSpace::Basis(b) => Some(b),
            NullSpace::ZeroMap { .. } => None,
        }
    }

    /// Invariant coordinates `X R` for the rows of `x`; `None` for the zero map.
    pub fn coordinates(&self, x: &DMatrix<T>) -> Result<Option<DMatrix<T>>> {
        if x.ncols() != self.ambient_dim() {
            return Err(dim_err(format!(
                "expected {} columns, got {}",
                self.ambient_dim(),
                x.ncols()
            )));
        }
        Ok(self.basis().map(|b| x * b.matrix()))
    }

    /// Orthogonal projector `R Rᵀ`; the zero matrix for the zero map.
    pub fn projection(&self) -> DMatrix<T> {
        match self {
            NullSpace::Basis(b) => super::projection_matrix(b),
            NullSpace::ZeroMap { dim } => DMatrix::zeros(*dim, *dim),
        }
    }
}

/// Samples a `d x m` matrix with orthonormal columns from the Haar measure.
///
/// QR of an i.i.d. standard Gaussian matrix, with column signs flipped so the
/// diagonal of the triangular factor is positive.
pub fn haar_orthonormal<T: Scalar, R: Rng + ?Sized>(
    d: usize,
    m: usize,
    rng: &mut R,
) -> Result<OrthonormalBasis<T>> {
    if m > d {
        return Err(dim_err(format!("cannot sample {m} orthonormal columns in R^{d}")));
    }
    if m == 0 {
        return Ok(OrthonormalBasis::new_unchecked(DMatrix::zeros(d, 0)));
    }
    let g = DMatrix::from_fn(d, m, |_, _| T::sample_standard_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(OrthonormalBasis::new_unchecked(q))
}

/// Orthonormal basis of `ker(Mᵀ)` for a `p x r` matrix of rank `q`.
///
/// Returns the last `p − q` left singular vectors of `M`, the identity when
/// `q = 0`, and [`NullSpace::ZeroMap`] when `q = p`. The rank is supplied by
/// the caller and never inferred here.
pub fn null_space_basis<T: Scalar>(m: &DMatrix<T>, q: usize) -> Result<NullSpace<T>> {
    ensure_finite(m, "null_space_basis input")?;
    let (p, r) = m.shape();
    if q > p {
        return Err(dim_err(format!("rank {q} exceeds row dimension {p}")));
    }
    if q == p {
        return Ok(NullSpace::ZeroMap { dim: p });
    }
    if q > r {
        return Err(dim_err(format!("rank {q} exceeds column dimension {r}")));
    }
    if q == 0 {
        return Ok(NullSpace::Basis(OrthonormalBasis::identity(p)));
    }
    // Pad with zero columns so the thin SVD yields a full p x p left factor.
    let padded = if r < p {
        let mut w = DMatrix::zeros(p, p);
        w.view_mut((0, 0), (p, r)).copy_from(m);
        w
    } else {
        m.clone()
    };
    let dec = svd(&padded)?;
    let cols = dec.u.columns(q, p - q).into_owned();
    Ok(NullSpace::Basis(OrthonormalBasis::new_unchecked(cols)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_one_dimensional_is_a_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let b = haar_orthonormal::<f64, _>(1, 1, &mut rng).unwrap();
            assert_eq!(b.matrix()[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn haar_columns_orthonormal_and_deterministic() {
        let a = haar_orthonormal::<f64, _>(5, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = haar_orthonormal::<f64, _>(5, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(a.orthonormality_error() <= 1e-10);
        assert_eq!(a, b);
    }

    #[test]
    fn haar_rejects_too_many_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            haar_orthonormal::<f64, _>(2, 3, &mut rng),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn null_space_of_ones_vector() {
        let m = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let ns = null_space_basis(&m, 1).unwrap();
        let r: &DMatrix<f64> = ns.basis().unwrap().matrix();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r[(0, 0)].abs() - s).abs() < 1e-12);
        assert!((r[(0, 0)] + r[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn full_rank_gives_zero_map() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let ns = null_space_basis(&m, 2).unwrap();
        assert!(ns.is_zero_map());
        assert_eq!(ns.projection(), DMatrix::zeros(2, 2));
        assert!(ns.coordinates(&DMatrix::zeros(3, 2)).unwrap().is_none());
    }

    #[test]
    fn rank_zero_gives_identity() {
        let ns = null_space_basis(&DMatrix::<f64>::zeros(3, 2), 0).unwrap();
        assert_eq!(ns.basis().unwrap().matrix(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn rejects_rank_above_dimension() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(null_space_basis(&m, 3), Err(Error::Dimension(_))));
        let tall = DMatrix::<f64>::zeros(4, 1);
        assert!(matches!(null_space_basis(&tall, 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn annihilates_constructed_low_rank_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = DMatrix::from_fn(10, 3, |_, _| f64::sample_standard_normal(&mut rng));
        let b = DMatrix::from_fn(5, 3, |_, _| f64::sample_standard_normal(&mut rng));
        let m = &a * b.transpose();
        let ns = null_space_basis(&m, 3).unwrap();
        let r = ns.basis().unwrap();
        assert_eq!(r.len(), 7);
        assert!(r.orthonormality_error() <= 1e-10);
        assert!((r.matrix().transpose() * &m).norm() <= 1e-8 * m.norm());
    }

    #[test]
    fn checked_constructor_rejects_non_orthonormal() {
        let m = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(OrthonormalBasis::new(m, 1e-10).is_err());
    }
}
