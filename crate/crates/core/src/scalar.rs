//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the fitting and statistics code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in the docs refer to
/// `f64`; `f32` instantiations clamp them to a few ulps of its epsilon.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the type cannot represent
    /// finite `f64` values at all, which no implementor does.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count fits in float")
    }

    /// `max(tol, k * epsilon)`, so a tolerance requested in `f64` terms stays
    /// reachable in lower precision.
    fn attainable(tol: f64, k: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(k);
        let t = Self::lit(tol);
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
