//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Real floating point scalar: `f32` or `f64`.
///
/// All matrices are stored as complex matrices over `Complex<T>`; real
/// algebras simply keep the imaginary parts at zero.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Serialize + DeserializeOwned
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub fn c<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub fn creal<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Absolute + relative tolerance pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel }
    }

    /// `abs + rel * scale`.
    pub fn at(&self, scale: T) -> T {
        self.abs + self.rel * scale.abs()
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs: T::lit(1e-9),
            rel: T::lit(1e-9),
        }
    }
}
