//! Floating-point scalar abstraction shared by every kernel in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point type the factorizations are generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Squared-norm ratio below which CPQR recomputes a downdated column norm.
    const NORM_DOWNDATE_TOL: f64;

    /// Relative off-diagonal threshold for one-sided Jacobi convergence.
    const JACOBI_TOL: f64;

    /// Converts an `f64` constant, panicking only on types that cannot represent finite f64 values.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const NORM_DOWNDATE_TOL: f64 = 1e-8;
    const JACOBI_TOL: f64 = 1e-14;
}

impl Scalar for f32 {
    // sqrt(eps) for single precision, the same rule LAPACK's xGEQP3 uses.
    const NORM_DOWNDATE_TOL: f64 = 3.4527e-4;
    const JACOBI_TOL: f64 = 1e-6;
}
