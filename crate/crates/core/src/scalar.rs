//! Scalar abstractions shared by every numerical module.
//!
//! The algebra, integrators and Gaussian-state code are written against
//! [`Real`] so the same routines run in `f32` or `f64`. Dense matrices are
//! written against [`Scalar`], which additionally covers the complex numbers
//! needed for complex matrix exponentials.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point number: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Scalar<Real = Self>
    + 'static
{
    /// Converts an `f64` literal. Every literal used in this crate is
    /// representable in both supported widths, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal fits the scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix entry type: a [`Real`] or a complex number over one.
pub trait Scalar:
    Copy + NumAssign + std::ops::Neg<Output = Self> + Debug + Send + Sync + 'static
{
    type Real: Real;

    fn modulus(self) -> Self::Real;
    fn from_real(r: Self::Real) -> Self;
    fn is_finite_value(self) -> bool;
    fn conjugate(self) -> Self;
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn is_finite_value(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn conjugate(self) -> Self {
                self
            }
        }
    };
}

macro_rules! complex_scalar {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            #[inline]
            fn modulus(self) -> $t {
                self.norm()
            }
            #[inline]
            fn from_real(r: $t) -> Self {
                Complex::new(r, 0.0)
            }
            #[inline]
            fn is_finite_value(self) -> bool {
                self.re.is_finite() && self.im.is_finite()
            }
            #[inline]
            fn conjugate(self) -> Self {
                Complex::conj(&self)
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);
complex_scalar!(f32);
complex_scalar!(f64);

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = T::from_usize(n - 1).unwrap();
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        b
                    } else {
                        a + (b - a) * (T::from_usize(i).unwrap() / last)
                    }
                })
                .collect()
        }
    }
}
