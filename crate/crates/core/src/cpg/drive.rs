use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear map from a tonic drive to oscillator frequency and
/// amplitude targets. Both outputs are zero outside `[d_low, d_high]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveMap {
    /// Slope of the frequency map (rad/s per drive unit).
    pub c_omega_1: f64,
    /// Offset of the frequency map (rad/s).
    pub c_omega_0: f64,
    /// Slope of the amplitude map.
    pub c_r_1: f64,
    /// Offset of the amplitude map.
    pub c_r_0: f64,
    pub d_low: f64,
    pub d_high: f64,
}

impl Default for DriveMap {
    fn default() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            c_omega_1: two_pi * 0.4,
            c_omega_0: two_pi * 0.3,
            c_r_1: 0.1,
            c_r_0: 0.2,
            d_low: 1.0,
            d_high: 5.0,
        }
    }
}

impl DriveMap {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.c_omega_1,
            self.c_omega_0,
            self.c_r_1,
            self.c_r_0,
            self.d_low,
            self.d_high,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("drive map contains non-finite values"));
        }
        if self.d_low >= self.d_high {
            return Err(Error::config(format!(
                "drive map requires d_low < d_high, got {} >= {}",
                self.d_low, self.d_high
            )));
        }
        if self.c_omega_1 < 0.0 || self.c_r_1 < 0.0 {
            return Err(Error::config("drive map slopes must be non-negative"));
        }
        Ok(())
    }

    /// Returns `(omega, R)` for drive `d`.
    pub fn saturate(&self, d: f64) -> (f64, f64) {
        if self.in_band(d) {
            (self.c_omega_1 * d + self.c_omega_0, self.c_r_1 * d + self.c_r_0)
        } else {
            (0.0, 0.0)
        }
    }

    pub fn in_band(&self, d: f64) -> bool {
        d >= self.d_low && d <= self.d_high
    }

    /// Largest frequency the map can produce.
    pub fn omega_max(&self) -> f64 {
        (self.c_omega_1 * self.d_high + self.c_omega_0)
            .max(self.c_omega_1 * self.d_low + self.c_omega_0)
    }

    /// Largest amplitude the map can produce.
    pub fn amplitude_max(&self) -> f64 {
        (self.c_r_1 * self.d_high + self.c_r_0).max(self.c_r_1 * self.d_low + self.c_r_0)
    }

    pub fn clamp(&self, d: f64) -> f64 {
        d.clamp(self.d_low, self.d_high)
    }
}

/// Free-function form of [`DriveMap::saturate`].
pub fn saturate_drive(d: f64, map: &DriveMap) -> (f64, f64) {
    map.saturate(d)
}

/// Left/right tonic drive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    pub d_left: f64,
    pub d_right: f64,
}

impl DriveSignal {
    pub fn new(d_left: f64, d_right: f64) -> Self {
        Self { d_left, d_right }
    }

    pub fn symmetric(d: f64) -> Self {
        Self::new(d, d)
    }

    pub fn mirrored(self) -> Self {
        Self::new(self.d_right, self.d_left)
    }
}
