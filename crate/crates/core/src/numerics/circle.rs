//! Phase arithmetic on the unit circle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO_MAGNITUDE: f64 = 1e-15;

/// Argument of `z` in `(-π, π]`.
pub fn principal_arg(z: Complex64) -> Result<f64> {
    let magnitude = z.norm();
    if !(magnitude > ZERO_MAGNITUDE) {
        return Err(Error::ZeroMagnitude { magnitude });
    }
    let arg = z.im.atan2(z.re);
    // atan2(-0.0, x < 0) lands on -π.
    Ok(if arg <= -PI { PI } else { arg })
}

/// Representative of `angle` in `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Geodesic distance between two angles on the circle, in `[0, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Neumaier-compensated running sum. Long sums of small step angles keep
/// their accuracy even when the partial sums grow to many turns.
#[derive(Clone, Copy, Debug, Default)]
pub struct AngleSum {
    sum: f64,
    compensation: f64,
}

impl AngleSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
