use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::learners::Predictor;
use crate::linalg::{ensure_finite, inverse_shifted_covariance, limit_inverse_shifted_covariance, null_space_basis, NullSpace};
use crate::simdg::{SimdgSpec, StructuralFunction};
use crate::Scalar;

/// Population invariant predictor for Gaussian noise with `E[U | V] = γ0ᵀV`.
#[derive(Clone, Debug)]
pub struct ImpOracle<T: Scalar> {
    f0: StructuralFunction<T>,
    null_space: NullSpace<T>,
    gamma0: DVector<T>,
    sigma: DMatrix<T>,
    noise_sd: T,
    /// `R(RᵀΣR)⁻¹RᵀΣγ0`.
    weights: DVector<T>,
    /// `ΣR(RᵀΣR)⁻¹RᵀΣ`.
    explained: DMatrix<T>,
}

impl<T: Scalar> ImpOracle<T> {
    pub fn new(spec: &SimdgSpec<T>) -> Result<Self> {
        let noise = spec.noise();
        let null_space = null_space_basis(spec.m0(), spec.rank())?;
        Self::from_parts(
            spec.f0().clone(),
            null_space,
            noise.control_coefficients(),
            noise.v_covariance(),
            noise.baseline_sd(),
        )
    }

    pub fn from_parts(
        f0: StructuralFunction<T>,
        null_space: NullSpace<T>,
        gamma0: DVector<T>,
        sigma: DMatrix<T>,
        noise_sd: T,
    ) -> Result<Self> {
        let p = f0.input_dim();
        if null_space.ambient_dim() != p || gamma0.len() != p || sigma.shape() != (p, p) {
            return Err(dim_err(format!("oracle parts must all live in dimension {p}")));
        }
        ensure_finite(&sigma, "Sigma")?;
        if !(noise_sd >= T::zero()) {
            return Err(Error::InvalidInput("noise sd must be non-negative".into()));
        }
        let pi = limit_inverse_shifted_covariance(&null_space, &sigma)?;
        let weights = &pi * &sigma * &gamma0;
        let explained = &sigma * &pi * &sigma;
        Ok(Self {
            f0,
            null_space,
            gamma0,
            sigma,
            noise_sd,
            weights,
            explained,
        })
    }

    pub fn null_space(&self) -> &NullSpace<T> {
        &self.null_space
    }

    pub fn gamma0(&self) -> &DVector<T> {
        &self.gamma0
    }

    pub fn sigma(&self) -> &DMatrix<T> {
        &self.sigma
    }

    /// Linear weights on `x` added to `f0`.
    pub fn control_weights(&self) -> &DVector<T> {
        &self.weights
    }

    /// `f0(x) + γ0ᵀΣR(RᵀΣR)⁻¹Rᵀx`.
    pub fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        Ok(self.f0.evaluate(x)? + x * &self.weights)
    }

    /// `γ0ᵀ(Σ − ΣR(RᵀΣR)⁻¹RᵀΣ)γ0 + sd²`, the same under every shift.
    pub fn risk(&self) -> T {
        let g = &self.gamma0;
        let residual = g.dot(&(&self.sigma * g)) - g.dot(&(&self.explained * g));
        residual + self.noise_sd * self.noise_sd
    }
}

impl<T: Scalar> Predictor<T> for ImpOracle<T> {
    fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        ImpOracle::predict(self, x)
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.gamma0.len())
    }
}

/// Both sides of the identity relating the training risk of the invariant
/// predictor to that of the least-squares regression `E[Y | X]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskCheck<T> {
    /// Sample mean of `(Y − f⋆(X))²` on fresh training data.
    pub monte_carlo: T,
    pub standard_error: T,
    /// `ls_risk + extra`.
    pub closed_form: T,
    /// `γ0ᵀ(Σ − ΣB₁⁻¹Σ)γ0 + sd²` with `B₁ = M0M0ᵀ + Σ`.
    pub ls_risk: T,
    /// `E[(E[γ0(V) | RᵀX] − E[γ0(V) | X])²]`.
    pub extra: T,
}

impl<T: Scalar> RiskCheck<T> {
    /// Difference in units of the Monte Carlo standard error.
    pub fn z_score(&self) -> T {
        let diff = (self.monte_carlo - self.closed_form).abs();
        if self.standard_error > T::zero() {
            diff / self.standard_error
        } else if diff == T::zero() {
            T::zero()
        } else {
            T::max_value().unwrap_or_else(T::one)
        }
    }
}

/// Simulates `n` training draws and compares the risk of the invariant
/// predictor with the closed-form decomposition.
pub fn risk_decomposition_check<T: Scalar, R: Rng + ?Sized>(
    spec: &SimdgSpec<T>,
    n: usize,
    rng: &mut R,
) -> Result<RiskCheck<T>> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two draws".into()));
    }
    let oracle = ImpOracle::new(spec)?;
    let data = spec.generate(T::one(), n, rng)?;
    let residual = data.y() - oracle.predict(data.x())?;
    let sq = residual.map(|e| e * e);
    let nf = T::from_count(n);
    let mean = sq.sum() / nf;
    let var = sq.iter().map(|&s| (s - mean) * (s - mean)).fold(T::zero(), |a, b| a + b) / T::from_count(n - 1);
    let standard_error = (var / nf).sqrt();

    let sigma = oracle.sigma();
    let g = oracle.gamma0();
    let b1_inv = inverse_shifted_covariance(spec.m0(), sigma, T::one())?;
    let b1 = spec.m0() * spec.m0().transpose() + sigma;
    let sd = spec.noise().baseline_sd();
    let ls_risk = g.dot(&(sigma * g)) - g.dot(&(sigma * &b1_inv * sigma * g)) + sd * sd;
    let pi = limit_inverse_shifted_covariance(oracle.null_space(), sigma)?;
    let diff = (pi - b1_inv) * sigma * g;
    let extra = diff.dot(&(&b1 * &diff));

    Ok(RiskCheck {
        monte_carlo: mean,
        standard_error,
        closed_form: ls_risk + extra,
        ls_risk,
        extra,
    })
}
