use serde::{Deserialize, Serialize};

use super::config::{Backend, ScenarioConfig};
use super::metrics::{psi_rmse, rhythm};
use super::run::{simulate, RunOutput};
use crate::analysis::wrap_angle;
use crate::error::{Error, Result};

/// Steady-state differences of a run against a reference run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendComparison {
    /// `|f - f_ref| / f_ref`.
    pub frequency_error: f64,
    /// Largest per-segment joint lag difference (rad).
    pub phase_lag_error: f64,
    /// Waveform RMSE after frequency/phase alignment.
    pub psi_rmse: f64,
}

pub fn compare_outputs(test: &RunOutput, reference: &RunOutput, config: &ScenarioConfig) -> Result<BackendComparison> {
    let dt = config.dt();
    let from = reference.psi.row_at(config.transient);
    let no_rhythm = |who: &str| Error::divergence("compare", config.duration, format!("{who} run has no rhythm after the transient"));
    let (ft, lt) = rhythm(&test.psi, dt, from).ok_or_else(|| no_rhythm("test"))?;
    let (fr, lr) = rhythm(&reference.psi, dt, from).ok_or_else(|| no_rhythm("reference"))?;
    let phase_lag_error = lt
        .iter()
        .zip(&lr)
        .map(|(a, b)| wrap_angle(a - b).abs())
        .fold(0.0, f64::max);
    Ok(BackendComparison {
        frequency_error: (ft - fr).abs() / fr,
        phase_lag_error,
        psi_rmse: psi_rmse(&test.psi, &reference.psi, dt, from),
    })
}

/// Runs `config` on the spiking and the ideal backend under identical
/// drives and compares them after the transient.
pub fn compare_backends(config: &ScenarioConfig) -> Result<BackendComparison> {
    let mut spiking = config.clone();
    spiking.backend = Backend::Spiking;
    let mut ideal = config.clone();
    ideal.backend = Backend::Ideal;
    compare_outputs(&simulate(&spiking)?, &simulate(&ideal)?, config)
}
