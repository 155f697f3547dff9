//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the library is generic over (`f32` or `f64`).
///
/// The associated tolerances scale the numerical contracts to the precision
/// of the type: the `f64` values are the ones the documented contracts use.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Relative Frobenius tolerance for accepting a matrix as Hermitian.
    const HERMITIAN_TOL: f64;
    /// Condition estimate above which an unregularized solve is refused.
    const MAX_CONDITION: f64;
    /// Relative off-diagonal mass at which the Jacobi sweep stops.
    const JACOBI_TOL: f64;
}

impl Real for f64 {
    const HERMITIAN_TOL: f64 = 1e-10;
    const MAX_CONDITION: f64 = 1e10;
    const JACOBI_TOL: f64 = 1e-15;
}

impl Real for f32 {
    const HERMITIAN_TOL: f64 = 1e-4;
    const MAX_CONDITION: f64 = 1e5;
    const JACOBI_TOL: f64 = 1e-7;
}

/// Converts an `f64` literal or parameter into the working scalar.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 is representable in every Real type")
}

/// Converts a working scalar back to `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("Real values convert to f64")
}
