//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar the simulators are generic over.
///
/// Implemented for `f32` and `f64`. The default numerical tolerances in this
/// crate are sized for `f64`; `f32` users should loosen them through the
/// corresponding option structs.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + FloatConst
    + FftNum
    + Default
    + Display
    + LowerExp
    + Debug
{
}

impl<T> Real for T where
    T: RealField
        + Copy
        + FromPrimitive
        + ToPrimitive
        + FloatConst
        + FftNum
        + Default
        + Display
        + LowerExp
        + Debug
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts an unsigned count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// `|z|` for a complex number over `T`.
#[inline]
pub fn modulus<T: Real>(z: nalgebra::Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `exp(z)` for a complex number over `T`.
#[inline]
pub fn cexp<T: Real>(z: nalgebra::Complex<T>) -> nalgebra::Complex<T> {
    let r = z.re.exp();
    nalgebra::Complex::new(r * z.im.cos(), r * z.im.sin())
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
