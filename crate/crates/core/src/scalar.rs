use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point type the pointwise special functions and quadrature rules are generic over.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Relative stopping tolerance for power series: the larger of `1e-15` and machine epsilon.
    #[inline]
    fn series_tol() -> Self {
        Self::lit(1e-15).max(Self::epsilon())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
