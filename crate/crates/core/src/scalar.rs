//! Scalar abstraction shared by every numeric module.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Floating point scalar the attitude algebra is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Machine epsilon of the scalar type.
    #[inline]
    fn eps() -> Self {
        Float::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `-1` for negative input, `+1` otherwise (zero maps to `+1`).
#[inline]
pub fn sign_plus<T: Real>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}
