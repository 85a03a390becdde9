use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating point type used for linear-compactor weights and interpolated ranks.
///
/// Implemented for `f32` and `f64`. Item values stay `u64`; only weights,
/// cumulative ranks and interpolation factors use this type.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an item count or a value difference.
    fn from_count(x: u64) -> Self {
        <Self as FromPrimitive>::from_u64(x).expect("every u64 maps to a float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 converts to any float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
