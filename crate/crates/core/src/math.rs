//! Scalar helpers shared by the physical model. All transcendental functions
//! go through `libm` so results do not depend on whether `std` is linked.

pub use num_complex::Complex64 as C64;

pub use libm::{atan2, ceil, cos, exp, log, log10, log2, pow, sin, sqrt, tanh};

pub const PI: f64 = core::f64::consts::PI;
pub const TAU: f64 = core::f64::consts::TAU;

/// `exp(j·angle)`.
#[inline]
pub fn cis(angle: f64) -> C64 {
    C64::new(cos(angle), sin(angle))
}

/// Power ratio for a value in dB.
#[inline]
pub fn db_to_power(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

/// Field (amplitude) ratio for a gain in dB or dBi.
#[inline]
pub fn db_to_amplitude(db: f64) -> f64 {
    pow(10.0, db / 20.0)
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    pow(10.0, (dbm - 30.0) / 10.0)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}
