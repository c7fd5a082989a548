//! Scalar abstraction: every numerical kernel in this crate is generic over
//! the floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, NumCast};

/// Floating-point scalar (`f32` or `f64`) the kernels are generic over.
///
/// Tolerances quoted in the documentation assume `f64`; with `f32` they are
/// widened to a small multiple of the machine epsilon where needed.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` constant into the scalar type.
    #[inline]
    fn real(x: f64) -> Self {
        NumCast::from(x).expect("constant not representable in scalar type")
    }

    /// Convert a count into the scalar type.
    #[inline]
    fn from_count(x: usize) -> Self {
        NumCast::from(x).expect("count not representable in scalar type")
    }

    /// Lossy view as `f64`, for reporting and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
