//! Real scalar abstraction.
//!
//! Everything numeric in the crate is generic over [`Real`], which is
//! implemented for `f32` and `f64`. Complex entries are `num_complex::Complex<T>`.
//!
//! Tolerances throughout the crate are written as `f64` literals tuned for
//! double precision. [`Real::tol`] converts them and raises them to a floor
//! that is meaningful for the scalar's own epsilon, so that `f32` code paths
//! do not demand precision the type cannot deliver.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar usable by every routine in the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Smallest tolerance this scalar can honour.
    const TOL_FLOOR: f64;

    /// Converts an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Converts a tolerance, raised to [`Real::TOL_FLOOR`].
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x.max(Self::TOL_FLOOR))
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 2e-4;
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Clamps `x` into `[lo, hi]` and reports how far outside it was.
pub fn clamp_with_overshoot<T: Real>(x: T, lo: T, hi: T) -> (T, T) {
    if x > hi {
        (hi, x - hi)
    } else if x < lo {
        (lo, lo - x)
    } else {
        (x, T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_applies_to_single_precision() {
        assert_eq!(<f64 as Real>::tol(1e-10), 1e-10);
        assert!(<f32 as Real>::tol(1e-10) >= 1e-4);
    }

    #[test]
    fn clamp_reports_overshoot() {
        let (v, o) = clamp_with_overshoot(1.0 + 1e-12, 0.0, 1.0);
        assert_eq!(v, 1.0);
        assert!((o - 1e-12).abs() < 1e-15);
        assert_eq!(clamp_with_overshoot(0.5, 0.0, 1.0), (0.5, 0.0));
    }
}
