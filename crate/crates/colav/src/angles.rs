//! Angle wrapping helpers shared across guidance, control, and risk code.
//!
//! All headings in this crate are measured clockwise from North in a
//! North-East frame and wrapped to the half-open interval `(-pi, pi]`.

use std::f64::consts::{PI, TAU};

/// Wrap an angle in radians to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Wrap an angle in degrees to `(-180, 180]`.
pub fn wrap_degrees(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(360.0);
    if wrapped > 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Smallest signed difference `a - b`, wrapped to `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}
