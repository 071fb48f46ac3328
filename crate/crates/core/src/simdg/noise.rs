use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::Scalar;

/// Jointly Gaussian `(U, V)` with `E[VVᵀ] = I_p`, `E[VU] = c·η` and
/// `E[U²] = c² + sd²`.
///
/// Realized as `V ~ N(0, I_p)` and `U = c·ηᵀV + ε` with `ε ~ N(0, sd²)`, so
/// the control function `E[U | V = v] = c·ηᵀv` is linear.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianNoiseSpec<T: Scalar> {
    eta: DVector<T>,
    confounding_strength: T,
    baseline_sd: T,
}

impl<T: Scalar> GaussianNoiseSpec<T> {
    pub const DEFAULT_BASELINE_SD: f64 = 0.1;

    pub fn new(eta: DVector<T>, confounding_strength: T, baseline_sd: T) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::InvalidInput("eta must be non-empty".into()));
        }
        if (eta.norm() - T::one()).abs() > T::lit(1e-10).max(T::default_epsilon() * T::lit(16.0)) {
            return Err(Error::InvalidInput("eta must have unit length".into()));
        }
        if confounding_strength < T::zero() || baseline_sd < T::zero() {
            return Err(Error::InvalidInput(
                "confounding strength and noise sd must be non-negative".into(),
            ));
        }
        Ok(Self {
            eta,
            confounding_strength,
            baseline_sd,
        })
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self) -> &DVector<T> {
        &self.eta
    }

    pub fn confounding_strength(&self) -> T {
        self.confounding_strength
    }

    pub fn baseline_sd(&self) -> T {
        self.baseline_sd
    }

    /// Coefficients of the linear control function, `c·η`.
    pub fn control_coefficients(&self) -> DVector<T> {
        &self.eta * self.confounding_strength
    }

    /// Covariance of `V` (always the identity here).
    pub fn v_covariance(&self) -> DMatrix<T> {
        DMatrix::identity(self.dim(), self.dim())
    }

    pub fn u_variance(&self) -> T {
        let c = self.confounding_strength;
        c * c + self.baseline_sd * self.baseline_sd
    }

    /// Covariance of `(V, U)` as a `(p + 1) x (p + 1)` matrix.
    pub fn joint_covariance(&self) -> DMatrix<T> {
        let p = self.dim();
        let mut cov = DMatrix::identity(p + 1, p + 1);
        let cross = self.control_coefficients();
        for i in 0..p {
            cov[(i, p)] = cross[i];
            cov[(p, i)] = cross[i];
        }
        cov[(p, p)] = self.u_variance();
        cov
    }

    /// Draws `n` rows of `(U, V)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (DVector<T>, DMatrix<T>) {
        let p = self.dim();
        // Row-major fill so the draw order is row by row.
        let v = DMatrix::from_row_iterator(n, p, (0..n * p).map(|_| T::sample_standard_normal(rng)));
        let eps = DVector::from_iterator(n, (0..n).map(|_| self.baseline_sd * T::sample_standard_normal(rng)));
        let u = &v * self.control_coefficients() + eps;
        (u, v)
    }
}

/// Samples a noise spec with `η` uniform on the unit sphere of `R^p`.
pub fn sample_noise_spec<T: Scalar, R: Rng + ?Sized>(
    p: usize,
    c: T,
    baseline_sd: T,
    rng: &mut R,
) -> Result<GaussianNoiseSpec<T>> {
    if p == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if c < T::zero() {
        return Err(Error::InvalidInput("confounding strength must be non-negative".into()));
    }
    let eta = loop {
        let g = DVector::from_iterator(p, (0..p).map(|_| T::sample_standard_normal(rng)));
        let norm = g.norm();
        if norm > T::zero() {
            break g / norm;
        }
    };
    GaussianNoiseSpec::new(eta, c, baseline_sd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_dimensional_eta_is_a_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = sample_noise_spec::<f64, _>(1, 2.0, 0.1, &mut rng).unwrap();
        assert_eq!(spec.eta()[0].abs(), 1.0);
    }

    #[test]
    fn default_parameters_give_u_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = sample_noise_spec::<f64, _>(10, 2.0, 0.1, &mut rng).unwrap();
        assert!((spec.u_variance() - 4.01).abs() < 1e-12);
        assert!((spec.eta().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_confounding_has_no_cross_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = sample_noise_spec::<f64, _>(4, 0.0, 0.1, &mut rng).unwrap();
        assert!(spec.control_coefficients().iter().all(|&v| v == 0.0));
        assert!((spec.u_variance() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn joint_covariance_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = sample_noise_spec(6, 3.0, 0.1, &mut rng).unwrap();
        let eig = spec.joint_covariance().symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn rejects_non_unit_eta() {
        let eta = DVector::from_vec(vec![1.0, 1.0]);
        assert!(GaussianNoiseSpec::new(eta, 1.0, 0.1).is_err());
    }
}
