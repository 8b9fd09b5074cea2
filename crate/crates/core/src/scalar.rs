//! Scalar abstractions shared by the real and complex code paths.
//!
//! Every kernel in this crate is written once against [`Scalar`], which is
//! implemented for `f32`, `f64`, `Complex<f32>` and `Complex<f64>`. The real
//! field of a scalar is exposed as [`Scalar::Real`] and bounded by [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Zero};
use serde::{Deserialize, Serialize};

/// The field the measurement vectors and the signal live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl FieldTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldTag::Real => "real",
            FieldTag::Complex => "complex",
        }
    }
}

impl Display for FieldTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FieldTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" => Ok(FieldTag::Real),
            "complex" => Ok(FieldTag::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

/// Floating point type: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for constants and sampled draws.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Element of the real or complex field.
pub trait Scalar:
    Copy + PartialEq + Debug + Default + Send + Sync + NumAssign + Neg<Output = Self> + Sum + 'static
{
    type Real: Real;

    const FIELD: FieldTag;

    fn from_real(re: Self::Real) -> Self;

    /// Builds `re + i·im`; real scalars drop `im`.
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;

    fn re(self) -> Self::Real;

    fn im(self) -> Self::Real;

    fn conj(self) -> Self;

    /// `|self|²`
    fn abs_sqr(self) -> Self::Real;

    fn abs(self) -> Self::Real;

    fn scale(self, r: Self::Real) -> Self;

    fn is_finite(self) -> bool;

    /// `e^{iθ}` in the complex field; `cos θ` (so `±1` at `0` and `π`) in the real one.
    fn unit_phase(theta: Self::Real) -> Self {
        Self::from_parts(theta.cos(), theta.sin())
    }

    /// Argument in `[0, 2π)`; real scalars map to `0` or `π`.
    fn phase_angle(self) -> Self::Real {
        let two_pi = Self::Real::TAU();
        let a = self.im().atan2(self.re());
        if a < Self::Real::zero() {
            a + two_pi
        } else {
            a
        }
    }
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const FIELD: FieldTag = FieldTag::Real;

            #[inline]
            fn from_real(re: $t) -> Self {
                re
            }
            #[inline]
            fn from_parts(re: $t, _im: $t) -> Self {
                re
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                0.0
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn abs_sqr(self) -> $t {
                self * self
            }
            #[inline]
            fn abs(self) -> $t {
                <$t>::abs(self)
            }
            #[inline]
            fn scale(self, r: $t) -> Self {
                self * r
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

macro_rules! complex_scalar {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            const FIELD: FieldTag = FieldTag::Complex;

            #[inline]
            fn from_real(re: $t) -> Self {
                Complex::new(re, 0.0)
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Self {
                Complex::new(re, im)
            }
            #[inline]
            fn re(self) -> $t {
                self.re
            }
            #[inline]
            fn im(self) -> $t {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::new(self.re, -self.im)
            }
            #[inline]
            fn abs_sqr(self) -> $t {
                self.re * self.re + self.im * self.im
            }
            #[inline]
            fn abs(self) -> $t {
                self.re.hypot(self.im)
            }
            #[inline]
            fn scale(self, r: $t) -> Self {
                Complex::new(self.re * r, self.im * r)
            }
            #[inline]
            fn is_finite(self) -> bool {
                self.re.is_finite() && self.im.is_finite()
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);
complex_scalar!(f32);
complex_scalar!(f64);

/// `u* v = Σ conj(u_i) v_i`.
#[inline]
pub fn inner<S: Scalar>(u: &[S], v: &[S]) -> S {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).fold(S::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

#[inline]
pub fn norm_sqr<S: Scalar>(v: &[S]) -> S::Real {
    v.iter().fold(S::Real::zero(), |acc, &a| acc + a.abs_sqr())
}

#[inline]
pub fn norm<S: Scalar>(v: &[S]) -> S::Real {
    norm_sqr(v).sqrt()
}

/// Euclidean distance `‖u − v‖`.
pub fn distance<S: Scalar>(u: &[S], v: &[S]) -> S::Real {
    u.iter()
        .zip(v)
        .fold(S::Real::zero(), |acc, (&a, &b)| acc + (a - b).abs_sqr())
        .sqrt()
}

pub fn scaled<S: Scalar>(v: &[S], r: S::Real) -> Vec<S> {
    v.iter().map(|&a| a.scale(r)).collect()
}

pub fn all_finite<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(|a| a.is_finite())
}
