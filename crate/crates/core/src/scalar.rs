//! Scalar traits shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, ToPrimitive, Zero};

/// Real floating point scalar: `f32` or `f64`.
///
/// Tolerances throughout the crate are expressed relative to
/// [`Float::epsilon`], so the same code runs in single precision with
/// proportionally looser guarantees.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix entry: a real scalar or a complex number over one.
pub trait Field:
    Copy + NumAssign + Neg<Output = Self> + Sum + Debug + Send + Sync + 'static
{
    type Real: Real;

    fn modulus(self) -> Self::Real;
    fn conj(self) -> Self;
    fn from_real(r: Self::Real) -> Self;
    fn real(self) -> Self::Real;
}

impl<T: Real> Field for T {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }

    #[inline]
    fn conj(self) -> T {
        self
    }

    #[inline]
    fn from_real(r: T) -> T {
        r
    }

    #[inline]
    fn real(self) -> T {
        self
    }
}

impl<T: Real> Field for Complex<T> {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }

    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }

    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }

    #[inline]
    fn real(self) -> T {
        self.re
    }
}

pub(crate) fn zero<E: Field>() -> E {
    E::zero()
}

pub(crate) fn one<E: Field>() -> E {
    E::one()
}

#[allow(dead_code)]
pub(crate) fn is_zero<E: Field>(x: E) -> bool {
    x.is_zero() || x.modulus() == <E::Real as Zero>::zero()
}

#[allow(dead_code)]
pub(crate) fn unit<E: Field>() -> E::Real {
    <E::Real as One>::one()
}
