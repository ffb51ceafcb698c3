//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the numeric modules are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize fits in a float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Comparison tolerance: `base` or a few hundred ulps, whichever is larger.
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(256.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;

pub(crate) fn cplx<T: Scalar>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

pub(crate) fn creal<T: Scalar>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `exp(i·theta)`.
pub(crate) fn cis<T: Scalar>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}
