//! Scalar abstraction: all dense linear algebra in this crate is generic over
//! the floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssignOps};

/// Floating-point scalar usable in solver state: `f32` or `f64`.
///
/// Singular value decompositions are carried out in `f64` internally and cast
/// back, so `f32` trades precision for memory, not the other way around.
pub trait Scalar:
    Float + NumAssignOps + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for constants and parameters.
    fn from_f64(value: f64) -> Self {
        <Self as num_traits::NumCast>::from(value).expect("finite f64 converts to scalar")
    }

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }

    /// Exact conversion of a small count.
    fn from_usize(value: usize) -> Self {
        Self::from_f64(value as f64)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
