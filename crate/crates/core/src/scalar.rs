//! Floating-point abstraction for the numerical modules.
//!
//! Everything that does arithmetic on probabilities or Laplacians is written
//! against [`Scalar`], which both `f32` and `f64` implement. Integer data
//! (adjacency powers, sufficient statistics, configurations) stays integral.

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

pub trait Scalar:
    RealField + Float + FromPrimitive + ToPrimitive + Sum + Copy + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` constant into this type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 constant")
    }

    fn from_count(x: u64) -> Self {
        <Self as FromPrimitive>::from_u64(x).expect("count fits in float")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// `max(x, 64 * machine epsilon)`, so tolerances written for `f64`
    /// degrade sensibly in single precision.
    fn tol(x: f64) -> Self {
        Float::max(Self::lit(x), <Self as Float>::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

// Both `Float` and `RealField` provide these methods; the free functions
// keep call sites unambiguous.

#[inline]
pub fn abs<T: Scalar>(x: T) -> T {
    Float::abs(x)
}

#[inline]
pub fn sqrt<T: Scalar>(x: T) -> T {
    Float::sqrt(x)
}

#[inline]
pub fn fmax<T: Scalar>(a: T, b: T) -> T {
    Float::max(a, b)
}

#[inline]
pub fn fmin<T: Scalar>(a: T, b: T) -> T {
    Float::min(a, b)
}

/// Entries below this magnitude are flushed to zero after arithmetic.
pub const FLUSH: f64 = 1e-15;

#[inline]
pub fn flush<T: Scalar>(x: T) -> T {
    if abs(x) < T::lit(FLUSH) {
        T::zero()
    } else {
        x
    }
}
