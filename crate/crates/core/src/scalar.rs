//! Scalar abstraction shared by the geometric types.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Real scalar usable for mesh coordinates, homographies and flow storage.
///
/// Implemented for `f32` and `f64`. Homography solves default to `f64`;
/// dense flow storage defaults to `f32`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless for `f32`/`f64` sources into `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn of(value: f64) -> Self {
        <Self as NumCast>::from(value).unwrap_or_else(Self::nan)
    }
}

impl Real for f32 {}
impl Real for f64 {}
