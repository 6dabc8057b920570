//! Scalar abstraction shared by every physics routine.

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use std::fmt::Debug;

/// Floating point type the closed forms, quadratures and integrators are written against.
///
/// Implemented for `f32`, `f64` and the double-double [`twofloat::TwoFloat`]. The last one is
/// what makes sub-nanoradian phase bookkeeping possible when individual branch phases are of
/// order 1e12 rad.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` constant into `Self`.
    ///
    /// Goes through `NumCast`: twofloat's `FromPrimitive::from_f64` is the num-traits default,
    /// which truncates to an integer.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Relative rounding unit. `Float::epsilon` reports the smallest normal f64 for twofloat.
    #[inline]
    fn eps() -> Self {
        Self::epsilon()
    }

    /// Lossy conversion used for error reporting and export.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for twofloat::TwoFloat {
    fn eps() -> Self {
        Self::lit(f64::EPSILON * f64::EPSILON)
    }
}
