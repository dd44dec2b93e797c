//! Scalar abstraction for the numerical core.
//!
//! All kernel, quadrature and approximation math is generic over [`Real`],
//! a floating-point scalar built from `num-traits` bounds. The crate root
//! exposes `f64` aliases for the common case; `f32` works for everything
//! but cannot meet the tight default tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar: f32 or f64.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Shorthand conversion from an f64 literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert into the scalar type")
    }

    /// Shorthand conversion from a usize count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must convert into the scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
