use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{sample_noise_spec, sample_tree_function, Dataset, GaussianNoiseSpec, StructuralFunction};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{haar_orthonormal, numerical_rank};
use crate::seed::StreamRng;
use crate::Scalar;

/// Samples `M0 = τ A Bᵀ` with Haar-distributed orthonormal `A` (`p x q`) and
/// `B` (`r x q`); all `q` nonzero singular values equal `τ`.
pub fn sample_m0<T: Scalar, R: Rng + ?Sized>(
    p: usize,
    r: usize,
    q: usize,
    tau: T,
    rng: &mut R,
) -> Result<DMatrix<T>> {
    if q > p.min(r) {
        return Err(dim_err(format!("rank {q} exceeds min(p, r) = {}", p.min(r))));
    }
    if tau < T::zero() {
        return Err(Error::InvalidInput("eigengap must be non-negative".into()));
    }
    let a = haar_orthonormal::<T, _>(p, q, rng)?;
    let b = haar_orthonormal::<T, _>(r, q, rng)?;
    Ok(a.matrix() * b.matrix().transpose() * tau)
}

/// Parameters of a randomly drawn model (tree `f0`, Haar `M0`, Gaussian noise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimdgParams {
    pub p: usize,
    pub r: usize,
    pub q: usize,
    pub p_eff: usize,
    pub depth: usize,
    pub theta_sd: f64,
    pub split_range: (f64, f64),
    pub confounding: f64,
    pub noise_sd: f64,
    pub tau: f64,
}

impl Default for SimdgParams {
    fn default() -> Self {
        Self {
            p: 10,
            r: 5,
            q: 5,
            p_eff: 3,
            depth: 3,
            theta_sd: 1.5,
            split_range: (-2.0, 2.0),
            confounding: 2.0,
            noise_sd: 0.1,
            tau: 1.0,
        }
    }
}

impl SimdgParams {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.r == 0 {
            return Err(Error::InvalidInput("p and r must be positive".into()));
        }
        if self.q > self.p.min(self.r) {
            return Err(dim_err(format!("q = {} exceeds min(p, r)", self.q)));
        }
        if self.p_eff == 0 || self.p_eff > self.p || self.depth == 0 {
            return Err(Error::InvalidInput("need 1 <= p_eff <= p and depth >= 1".into()));
        }
        if self.confounding < 0.0 || self.noise_sd < 0.0 || self.theta_sd < 0.0 || self.tau < 0.0 {
            return Err(Error::InvalidInput("scale parameters must be non-negative".into()));
        }
        Ok(())
    }
}

/// A fully specified model `(f0, M0, Λ0)` with shift family `N(0, k² I_r)`.
#[derive(Clone, Debug)]
pub struct SimdgSpec<T: Scalar> {
    f0: StructuralFunction<T>,
    m0: DMatrix<T>,
    rank: usize,
    noise: GaussianNoiseSpec<T>,
}

impl<T: Scalar> SimdgSpec<T> {
    /// Builds a spec; the rank of `M0` is determined numerically.
    pub fn new(f0: StructuralFunction<T>, m0: DMatrix<T>, noise: GaussianNoiseSpec<T>) -> Result<Self> {
        let rank = numerical_rank(&m0)?;
        Self::with_rank(f0, m0, rank, noise)
    }

    /// Builds a spec with an asserted rank, checked against the numerical rank.
    pub fn with_rank(
        f0: StructuralFunction<T>,
        m0: DMatrix<T>,
        rank: usize,
        noise: GaussianNoiseSpec<T>,
    ) -> Result<Self> {
        let p = m0.nrows();
        if f0.input_dim() != p || noise.dim() != p {
            return Err(dim_err(format!(
                "f0 domain {}, noise dimension {} and M0 rows {} must agree",
                f0.input_dim(),
                noise.dim(),
                p
            )));
        }
        let numeric = numerical_rank(&m0)?;
        if numeric != rank {
            return Err(Error::InvalidInput(format!(
                "M0 has numerical rank {numeric}, not {rank}"
            )));
        }
        Ok(Self { f0, m0, rank, noise })
    }

    /// Draws tree `f0`, `M0` and the noise spec, in that order.
    pub fn sample<R: Rng + ?Sized>(params: &SimdgParams, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let tree = sample_tree_function(
            params.p,
            params.p_eff,
            params.depth,
            T::lit(params.theta_sd),
            (T::lit(params.split_range.0), T::lit(params.split_range.1)),
            rng,
        )?;
        let m0 = sample_m0(params.p, params.r, params.q, T::lit(params.tau), rng)?;
        let noise = sample_noise_spec(params.p, T::lit(params.confounding), T::lit(params.noise_sd), rng)?;
        let rank = if params.tau == 0.0 { 0 } else { params.q };
        Self::with_rank(StructuralFunction::Tree(tree), m0, rank, noise)
    }

    pub fn f0(&self) -> &StructuralFunction<T> {
        &self.f0
    }

    pub fn m0(&self) -> &DMatrix<T> {
        &self.m0
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn noise(&self) -> &GaussianNoiseSpec<T> {
        &self.noise
    }

    pub fn p(&self) -> usize {
        self.m0.nrows()
    }

    pub fn r(&self) -> usize {
        self.m0.ncols()
    }

    /// Draws `n` observations with `Z ~ N(0, k² I_r)`.
    ///
    /// `Z` and `(U, V)` come from two child streams seeded off `rng`.
    pub fn generate<R: Rng + ?Sized>(&self, k: T, n: usize, rng: &mut R) -> Result<Dataset<T>> {
        if !(k > T::zero()) {
            return Err(Error::InvalidInput("shift strength k must be positive".into()));
        }
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        let mut z_rng = StreamRng::seed_from_u64(rng.random());
        let mut noise_rng = StreamRng::seed_from_u64(rng.random());
        let r = self.r();
        let z = DMatrix::from_row_iterator(n, r, (0..n * r).map(|_| k * T::sample_standard_normal(&mut z_rng)));
        let (u, v) = self.noise.sample(n, &mut noise_rng);
        let x = &z * self.m0.transpose() + &v;
        let y: DVector<T> = self.f0.evaluate(&x)? + &u;
        Dataset::with_latents(x, y, z, u, v)
    }
}
