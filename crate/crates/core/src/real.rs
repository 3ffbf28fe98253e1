//! Scalar abstraction for the numerical core.
//!
//! Everything stochastic or analytic in this crate is generic over a
//! [`Real`] scalar so the same code runs at `f64` (the default used by the
//! harness and CLI) or `f32`. Exact rational arithmetic, used by the
//! symbolic pole calculator, lives in [`crate::invariants`] and is not part
//! of this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar usable throughout the core.
pub trait Real:
    Float
    + FromPrimitive
    + SampleUniform
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for literals and tolerances.
    fn of(x: f64) -> Self;

    /// Widening conversion to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64;

    /// One draw from the standard normal distribution.
    fn std_normal<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn std_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
                StandardNormal.sample(rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// ln(2π), the constant that shows up in every Gaussian log density.
pub const LN_2PI: f64 = 1.837877066409345483560659472811;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ln_2pi_value() {
        assert!((LN_2PI - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn std_normal_moments_f64() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for _ in 0..n {
            let x = f64::std_normal(&mut rng);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn generic_code_compiles_at_f32() {
        fn quadratic<R: Real>(x: R) -> R {
            R::of(0.5) * x * x
        }
        assert_eq!(quadratic(2.0f32), 2.0f32);
        assert_eq!(quadratic(2.0f64), 2.0f64);
    }
}
