use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leaky integrate-and-fire parameters with a normalised membrane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifParams {
    /// Membrane time constant (s).
    pub tau_rc: f64,
    /// Absolute refractory period (s).
    pub tau_ref: f64,
    pub v_threshold: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            tau_rc: 0.02,
            tau_ref: 0.002,
            v_threshold: 1.0,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_rc > 0.0) || !(self.tau_ref >= 0.0) || !(self.v_threshold > 0.0) {
            return Err(Error::config(format!("invalid LIF parameters {self:?}")));
        }
        Ok(())
    }

    /// Highest rate the refractory period allows (Hz).
    pub fn rate_ceiling(&self) -> f64 {
        if self.tau_ref > 0.0 {
            1.0 / self.tau_ref
        } else {
            f64::INFINITY
        }
    }

    /// Input current that yields `rate` Hz; inverse of [`lif_rate`].
    pub fn current_for_rate(&self, rate: f64) -> f64 {
        self.v_threshold / -((self.tau_ref - 1.0 / rate) / self.tau_rc).exp_m1()
    }
}

// The curve has infinite slope at threshold; currents within rounding of it
// count as silent.
const THRESHOLD_RTOL: f64 = 1e-12;

/// Steady-state firing rate (Hz) for a constant input current.
pub fn lif_rate(current: f64, params: &LifParams) -> f64 {
    if current <= params.v_threshold * (1.0 + THRESHOLD_RTOL) {
        0.0
    } else {
        1.0 / (params.tau_ref - params.tau_rc * (-params.v_threshold / current).ln_1p())
    }
}
