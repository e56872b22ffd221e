//! Scalar abstractions.
//!
//! The lifting algebra (arrow/Two maps, the linearized Kronecker products,
//! the J form, congruences) only needs ring operations, so it is written
//! against [`Scalar`] and works verbatim over exact rationals. Anything that
//! needs square roots or eigenvalues (cone residuals, the scaled PSD
//! vectorization, relaxation assembly) asks for [`RealScalar`].

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Ring-like element the exact lifting algebra is generic over.
pub trait Scalar:
    Copy + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// `self / 2`; exact for rationals and binary floats alike.
    fn half(self) -> Self {
        self / Self::two()
    }
}

impl<T> Scalar for T where
    T: Copy + Debug + PartialEq + PartialOrd + Num + Neg<Output = T> + Send + Sync + 'static
{
}

/// Floating-point scalar with the extras needed for cones and eigenvalues.
pub trait RealScalar: Scalar + nalgebra::RealField + FromPrimitive + ToPrimitive + Sum {
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn sqrt2() -> Self {
        Self::from_f64_lossy(std::f64::consts::SQRT_2)
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn half_is_exact_over_rationals() {
        let x = Rational64::new(3, 7);
        assert_eq!(x.half(), Rational64::new(3, 14));
        assert_eq!(Rational64::two(), Rational64::from_integer(2));
    }

    #[test]
    fn real_scalar_roundtrip() {
        assert_eq!(f32::from_f64_lossy(0.5), 0.5f32);
        assert_eq!(2.5f64.to_f64_lossy(), 2.5);
        assert!((f64::sqrt2() * f64::sqrt2() - 2.0).abs() < 1e-15);
    }
}
