//! Floating-point scalar abstraction used by the metric and gate code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the metrics are computed in: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Two-sided 95% standard normal quantile.
    fn z95() -> Self;

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as float")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable as float")
    }
}

impl Scalar for f32 {
    fn z95() -> Self {
        1.959_964
    }
}

impl Scalar for f64 {
    fn z95() -> Self {
        1.959_963_984_540_054
    }
}

/// True when `x` is a finite value in `[0, 1]`.
pub fn is_fraction<F: Scalar>(x: F) -> bool {
    x.is_finite() && x >= F::zero() && x <= F::one()
}
