//! Floating-point scalar abstraction shared by every geometric routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real number type the geometry, anchor, and loss code is written against.
///
/// Implemented for `f32` and `f64`. Integer raster quantities (pixel
/// coordinates, mask areas) stay integral regardless of the scalar.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for both supported widths.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar")
    }

    #[inline]
    fn from_i64_lossy(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
