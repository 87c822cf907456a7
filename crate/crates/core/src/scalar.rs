use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the geometry, filtering and planning code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that the API documents in absolute
/// millimeters (1e-9 and friends) are only meaningful for `f64`; the `f32`
/// instantiation is usable but looser.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion for diagnostics and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Slack allowed when checking that a vector is unit length.
    fn unit_tolerance() -> Self {
        Self::epsilon() * Self::lit(1.0e4)
    }
}

impl Real for f32 {}
impl Real for f64 {}
