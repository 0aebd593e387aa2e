use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

/// Number-like type that jets and networks are generic over.
///
/// Implemented by `f64` (plain evaluation) and [`Var`](super::Var) (recorded
/// evaluation).
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Numeric value.
    fn value(&self) -> f64;
    /// A constant living in the same context as `self`.
    fn lift_const(&self, c: f64) -> Self;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;
    fn sigmoid(self) -> Self;
    fn relu(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn recip(self) -> Self;

    #[inline]
    fn zero_like(&self) -> Self {
        self.lift_const(0.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn lift_const(&self, c: f64) -> Self {
        c
    }
    #[inline]
    fn exp(self) -> Self {
        math::exp(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        math::tanh(self)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        math::sigmoid(self)
    }
    #[inline]
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        math::powi(self, n)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
}
