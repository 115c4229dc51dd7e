//! Real scalar abstraction for the dense linear algebra.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point field the matrix kernels are generic over (`f32` or `f64`).
///
/// The tolerance hooks let validation code scale with the precision of the
/// scalar instead of hard-coding `f64` thresholds.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for Hermiticity and trace checks on density matrices.
    fn state_tol() -> Self;
    /// Most negative eigenvalue still accepted as positive semidefinite.
    fn psd_tol() -> Self;
    /// Relative off-diagonal mass at which iterative eigensolvers stop.
    fn eig_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn state_tol() -> Self {
        1e-10
    }
    fn psd_tol() -> Self {
        1e-9
    }
    fn eig_tol() -> Self {
        1e-15
    }
}

impl Real for f32 {
    fn state_tol() -> Self {
        1e-5
    }
    fn psd_tol() -> Self {
        1e-5
    }
    fn eig_tol() -> Self {
        1e-7
    }
}
