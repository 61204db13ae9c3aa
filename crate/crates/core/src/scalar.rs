//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the library is generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only for values outside the
    /// type's range (never the case for the constants used here).
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// `x^n` for signed integer `n`, via repeated squaring on the scalar.
    fn powi64(self, n: i64) -> Self {
        let n32 = n.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        self.powi(n32)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}
