use serde::{Deserialize, Serialize};

use super::domain::EvalDomain;
use crate::cpg::CpgParams;
use crate::error::{Error, Result};
use crate::nef::{LifParams, NeuronMode, Synapse};

/// Minimum population size before the build warns about decoding quality.
pub const MIN_RECOMMENDED_NEURONS: usize = 50;

/// What a spiking CPG records while stepping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProbeKind {
    /// Joint setpoints.
    Psi,
    /// Decoded `(x, y)` of every oscillator.
    DecodedXy,
    /// Spike events of the first `max_neurons` neurons of one oscillator
    /// population.
    Spikes { oscillator: usize, max_neurons: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScpgConfig {
    pub cpg: CpgParams,
    pub neurons_per_population: usize,
    pub seed: u64,
    /// Recurrent synapse of the oscillator populations; coupling and drive
    /// inputs share it.
    pub synapse: Synapse,
    /// Synapse from oscillators into the coupling populations.
    pub coupling_input_tau: f64,
    /// Synapse of the decoded `(x, y)` readout.
    pub readout_tau: f64,
    /// Synapse from the drive node into the drive populations.
    pub drive_input_tau: f64,
    pub dt: f64,
    /// Ridge regularization as a fraction of the largest rate.
    pub regularization: f64,
    /// Evaluation points per population; `None` uses the default rule.
    pub eval_points: Option<usize>,
    pub eval_domain: EvalDomain,
    /// Feed `(omega, R)` targets straight from a value node instead of
    /// spiking drive populations.
    pub drive_passthrough: bool,
    pub neuron_mode: NeuronMode,
    pub lif: LifParams,
    pub max_rate_range: (f64, f64),
    pub intercept_range: (f64, f64),
    pub probes: Vec<ProbeKind>,
}

impl Default for ScpgConfig {
    fn default() -> Self {
        Self {
            cpg: CpgParams::default(),
            neurons_per_population: 2000,
            seed: 0,
            synapse: Synapse { tau: 0.1 },
            coupling_input_tau: 0.005,
            readout_tau: 0.01,
            drive_input_tau: 0.005,
            dt: 1e-3,
            regularization: 0.05,
            eval_points: None,
            eval_domain: EvalDomain::Operating,
            drive_passthrough: false,
            neuron_mode: NeuronMode::Spiking,
            lif: LifParams::default(),
            max_rate_range: (200.0, 400.0),
            intercept_range: (-1.0, 0.9),
            probes: vec![ProbeKind::Psi, ProbeKind::DecodedXy],
        }
    }
}

impl ScpgConfig {
    pub fn validate(&self) -> Result<()> {
        self.cpg.validate()?;
        self.lif.validate()?;
        if self.neurons_per_population == 0 {
            return Err(Error::config("neurons_per_population must be at least 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.synapse.tau > 0.0) {
            return Err(Error::config("the recurrent synapse needs tau > 0"));
        }
        for (name, tau) in [
            ("coupling_input_tau", self.coupling_input_tau),
            ("readout_tau", self.readout_tau),
            ("drive_input_tau", self.drive_input_tau),
        ] {
            if !(tau >= 0.0) || !tau.is_finite() {
                return Err(Error::config(format!("{name} must be >= 0, got {tau}")));
            }
        }
        if !(self.regularization > 0.0) {
            return Err(Error::config("regularization must be > 0"));
        }
        if self.eval_points == Some(0) {
            return Err(Error::config("eval_points must be positive"));
        }
        for p in &self.probes {
            if let ProbeKind::Spikes { oscillator, .. } = p {
                if *oscillator >= self.cpg.n_oscillators() {
                    return Err(Error::config(format!("spike probe on unknown oscillator {oscillator}")));
                }
            }
        }
        Ok(())
    }

    /// Scale of the represented frequency dimension (rad/s).
    pub fn omega_scale(&self) -> f64 {
        self.cpg.drive_map.omega_max().max(f64::EPSILON)
    }

    /// Radius of the 4-d oscillator populations.
    pub fn oscillator_radius(&self) -> f64 {
        1.5 * self.cpg.drive_map.amplitude_max().max(1.0)
    }

    /// Radius of the 4-d coupling populations.
    pub fn coupling_radius(&self) -> f64 {
        (2.0f64.sqrt() * self.cpg.drive_map.amplitude_max() * 1.1).max(0.1)
    }

    /// Radius of the 1-d drive populations.
    pub fn drive_radius(&self) -> f64 {
        1.25 * self.cpg.drive_map.d_high
    }
}
