//! Scalar abstraction shared by the model, estimator and predictor.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the numerical core is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a scalar back to `f64` (used for error messages and logging).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    let wrapped = angle - two_pi * ((angle - pi) / two_pi).ceil();
    // rounding can land exactly on -pi
    if wrapped <= -pi {
        wrapped + two_pi
    } else {
        wrapped
    }
}
