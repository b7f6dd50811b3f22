//! Scalar abstraction for the numeric core.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the signal-processing core is generic over.
///
/// Implemented for `f32` and `f64`. The simulation layer pins
/// [`crate::Scalar`] = `f64`; the `f32` instantiation exists for callers
/// that want to trade precision for footprint.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + 'static
{
    /// Lossless-ish conversion from `f64` literals and config values.
    fn from_f64_lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal convertible to Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}
