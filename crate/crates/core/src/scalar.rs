//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Sum
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// `|t|^(e-1) t`, the odd power map.
#[inline]
pub fn odd_pow<T: Real>(t: T, e: T) -> T {
    if t == T::zero() {
        T::zero()
    } else {
        t.signum() * t.abs().powf(e)
    }
}

/// Surface area of the unit sphere in R^N, `2 pi^(N/2) / Gamma(N/2)`.
pub fn sphere_area<T: Real>(n: u32) -> T {
    // Recurrence: omega_1 = 2, omega_2 = 2 pi, omega_{n} = 2 pi / (n - 2) * omega_{n-2}.
    let two_pi = T::PI() + T::PI();
    let (mut area, mut k) = if n % 2 == 1 {
        (lit::<T>(2.0), 1u32)
    } else {
        (two_pi, 2u32)
    };
    while k < n {
        k += 2;
        area = area * two_pi / T::from_u32(k - 2).unwrap();
    }
    area
}

/// Volume of the ball of radius `radius` in R^N.
pub fn ball_volume<T: Real>(n: u32, radius: T) -> T {
    sphere_area::<T>(n) * radius.powi(n as i32) / T::from_u32(n).unwrap()
}
