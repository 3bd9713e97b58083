//! Real scalar abstraction.
//!
//! Every routine in the crate is written against [`Real`], which is implemented
//! for `f32` and `f64`. Operators are stored as dense `faer` matrices over
//! [`C<T>`](C), the complex numbers built on the chosen real type.

use std::fmt;

use faer::traits::RealField;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use num_complex::Complex;

/// Complex scalar over a [`Real`] base type.
pub type C<T> = Complex<T>;

/// Real floating point type usable as the base field of all operators.
pub trait Real:
    RealField
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Number of mantissa bits; used to scale default tolerances.
    const MANTISSA_DIGITS: u32;

    /// Converts an `f64` constant to this type (rounding for `f32`).
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    const MANTISSA_DIGITS: u32 = f64::MANTISSA_DIGITS;

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const MANTISSA_DIGITS: u32 = f32::MANTISSA_DIGITS;

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// Shannon-type entropy term `-x ln x`, zero for `x <= 0`.
#[inline]
pub(crate) fn xlogx_neg<T: Real>(x: T) -> T {
    if x > T::zero() {
        -x * x.ln()
    } else {
        T::zero()
    }
}

/// Binary entropy `H1(x) = -x ln x - (1-x) ln(1-x)` in nats.
pub fn binary_entropy<T: Real>(x: T) -> T {
    xlogx_neg(x) + xlogx_neg(T::one() - x)
}
