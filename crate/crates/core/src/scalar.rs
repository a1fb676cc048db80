//! Working-precision scalars.
//!
//! Every algebraic routine in this crate is generic over [`Real`], so the
//! same code runs in plain `f64` or in double-double arithmetic
//! ([`twofloat::TwoFloat`], roughly 32 significant digits). Input and output
//! data are always `f64`.

use std::fmt;

use num_traits::Float;
use twofloat::TwoFloat;

/// A real floating-point type usable as working precision.
pub trait Real: Float + fmt::Debug + Send + Sync + 'static {
    /// Unit roundoff of the type (half the spacing of floats just above 1).
    const UNIT_ROUNDOFF: f64;

    fn real(x: f64) -> Self;

    fn as_f64(self) -> f64;

    fn from_usize(k: usize) -> Self {
        Self::real(k as f64)
    }

    /// Correctly rounded (to working precision) quotient. Generic code uses
    /// this instead of `/`.
    fn quot(self, rhs: Self) -> Self {
        self / rhs
    }
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

    #[inline]
    fn real(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for TwoFloat {
    // 2^-104; `TwoFloat::EPSILON` is not the machine epsilon of the format.
    const UNIT_ROUNDOFF: f64 = 4.930380657631324e-32;

    #[inline]
    fn real(x: f64) -> Self {
        TwoFloat::from(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.into()
    }

    // `TwoFloat / TwoFloat` in twofloat 0.8 loses the low word (its
    // reciprocal step is computed without FMA). `TwoFloat / f64` is accurate,
    // so divide by the high word and correct once with the remainder.
    fn quot(self, rhs: Self) -> Self {
        let q1 = self / rhs.hi();
        let r = self - q1 * rhs;
        q1 + r / rhs.hi()
    }
}

/// Max-norm of a slice, returned as `f64`.
pub fn max_abs<T: Real>(xs: &[T]) -> f64 {
    xs.iter().map(|x| x.abs().as_f64()).fold(0.0, f64::max)
}

pub(crate) fn lift<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::real(x)).collect()
}

pub(crate) fn lower<T: Real>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.as_f64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_carries_extra_digits() {
        let third = TwoFloat::real(1.0).quot(TwoFloat::real(3.0));
        let err = (third * TwoFloat::real(3.0) - TwoFloat::real(1.0))
            .abs()
            .as_f64();
        assert!(err < 1e-30, "{err}");

        let a = TwoFloat::real(0.7) * TwoFloat::real(0.3) + TwoFloat::real(1e-20);
        let b = TwoFloat::real(1.0).quot(TwoFloat::real(7.0));
        let q = a.quot(b);
        assert!((q * b - a).abs().as_f64() < 1e-31);
    }
}
