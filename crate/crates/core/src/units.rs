//! Unit conventions.
//!
//! Configured frequencies are plain frequencies `f` in MHz, including bare
//! values such as a blockade of "100 MHz"; internally everything is an
//! angular frequency `ω = 2πf` in rad/μs. Times are in μs.

use core::f64::consts::TAU;

/// MHz → rad/μs.
#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// rad/μs → MHz.
#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TAU
}
