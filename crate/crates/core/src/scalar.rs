//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the simulator can run on: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
    + Ring<Self>
{
    /// Converts an `f64` literal. Never fails for the supported types.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Minimal ring interface used to evaluate vector fields on plain scalars
/// and on truncated Taylor series alike.
pub trait Ring<T>:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn constant(c: T) -> Self;
    fn scale(self, c: T) -> Self;
}

macro_rules! impl_ring {
    ($f:ty) => {
        impl Ring<$f> for $f {
            #[inline]
            fn constant(c: $f) -> Self {
                c
            }
            #[inline]
            fn scale(self, c: $f) -> Self {
                self * c
            }
        }
    };
}

impl_ring!(f32);
impl_ring!(f64);
