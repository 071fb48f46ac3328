//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real floating-point type the estimation pipeline can run on.
///
/// Implemented for `f32` and `f64`. Hyperparameters and tolerances are
/// expressed in `f64` and converted with [`Scalar::lit`].
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Relative singular-value threshold below which a direction counts as zero.
    fn rank_tolerance() -> Self;

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on `[low, high)`.
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self;

    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            #[inline]
            fn rank_tolerance() -> Self {
                $tol
            }

            #[inline]
            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self {
                low + (high - low) * rng.random::<$t>()
            }
        }
    };
}

impl_scalar!(f64, 1e-10);
impl_scalar!(f32, 1e-5);
