//! Scalar abstractions shared by every operator and state in the crate.
//!
//! Operators whose entries are integers (permutation realizations, hopping
//! and class-sum Hamiltonians) are generic over [`Scalar`], so they can be
//! built exactly over `i64` as well as over floating point or complex types.
//! Anything that needs square roots, exponentials or an eigensolver is
//! generic over [`Real`] instead.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

/// Ring-like element type of a [`SectorOperator`](crate::SectorOperator).
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(v: i64) -> Self;

    /// Complex conjugate; the identity for real types.
    fn conj(&self) -> Self;

    /// Absolute value as `f64`, used for residuals and tolerance checks.
    fn magnitude(&self) -> f64;
}

/// Real floating point scalar usable with the dense eigensolver.
pub trait Real:
    Scalar + nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Display
{
    /// Lossy conversion from `f64`.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for i64 {
    fn from_int(v: i64) -> Self {
        v
    }
    fn conj(&self) -> Self {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.unsigned_abs() as f64
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_int(v: i64) -> Self {
                v as $f
            }
            fn conj(&self) -> Self {
                *self
            }
            fn magnitude(&self) -> f64 {
                self.abs() as f64
            }
        }

        impl Real for $f {}
    };
}

impl_real!(f32);
impl_real!(f64);

impl<R: Real> Scalar for Complex<R> {
    fn from_int(v: i64) -> Self {
        Complex::new(R::from_int(v), R::zero())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn magnitude(&self) -> f64 {
        self.re.as_f64().hypot(self.im.as_f64())
    }
}

/// `e^{i theta}` for a generic real angle.
pub fn cis<R: Real>(theta: R) -> Complex<R> {
    Complex::new(theta.cos(), theta.sin())
}

/// Lifts a real number to the complex plane.
pub fn complex<R: Real>(re: R) -> Complex<R> {
    Complex::new(re, R::zero())
}
