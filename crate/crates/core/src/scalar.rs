//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Element type for model parameters and activations: `f32` or `f64`.
///
/// Model files always store parameters as 64-bit floats, so a `f32` model
/// round-trips losslessly while a `f64` model is stored bit-exactly.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Exact widening to `f64` for reports and serialization.
    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("float scalar always converts to f64")
    }

    /// Narrowing from `f64`, rounding to nearest.
    fn from_f64_rounded(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("float scalar always converts from f64")
    }

    fn lit(v: f64) -> Self {
        Self::from_f64_rounded(v)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    // Split on sign so exp never overflows.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}
