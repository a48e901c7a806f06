//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, LowerExp};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn squared(self) -> Self {
        self * self
    }
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Debug + Send + Sync + 'static
{
}

/// Complex amplitude over a real scalar.
pub type Amplitude<T> = Complex<T>;

/// `exp(-i theta)`.
#[inline]
pub(crate) fn phase<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), -theta.sin())
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Euclidean norm squared of an amplitude slice.
pub fn norm_sqr<T: Real>(amps: &[Complex<T>]) -> T {
    amps.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}
