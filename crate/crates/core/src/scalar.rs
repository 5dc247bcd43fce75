//! Scalar abstractions.
//!
//! Field, kernel and simulation code is written against [`Real`], which is
//! implemented for `f32` and `f64`. Index arithmetic (the admissibility
//! inequalities) only needs field operations and ordering, so it is generic
//! over [`IndexScalar`], which additionally admits exact rationals.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use rustfft::FftNum;

/// Floating point type usable for fields, transforms and sampling.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + num_traits::NumAssign
    + ndarray::ScalarOperand
    + Default
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in target float")
}

/// Converts a count into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in target float")
}

/// Lossy conversion to `f64` for diagnostics and error payloads.
#[inline]
pub fn to_f64<T: ToPrimitive>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Ordered field used for the regularity-index arithmetic.
///
/// `f64` and `num_rational::Rational64` both qualify; the rational instance
/// decides boundary cases such as `beta == 1 - alpha/2` exactly.
pub trait IndexScalar: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

impl<S> IndexScalar for S where S: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}
