use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::drive::{DriveMap, DriveSignal};
use super::integrate::{integrate_step_forced, CpgState, Method};
use super::oscillator::{motor_output_with, CartOscState, MotorReadout, OscillatorParams};
use super::topology::{build_topology, ChainTopology, PhaseConvention};
use crate::error::{Error, Result};

/// Parameters shared by the reference model and the spiking network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpgParams {
    pub n_segments: usize,
    /// Phase lag accumulated from head to tail (rad).
    pub total_phase_lag: f64,
    /// Uniform coupling weight (1/s).
    pub coupling_weight: f64,
    /// Joint angle per unit of oscillator output (rad).
    pub output_gain: f64,
    /// Amplitude convergence gain of the Cartesian form (1/s).
    pub amplitude_gain: f64,
    pub convention: PhaseConvention,
    pub motor_readout: MotorReadout,
    pub drive_map: DriveMap,
}

impl Default for CpgParams {
    fn default() -> Self {
        Self {
            n_segments: 8,
            total_phase_lag: 2.0 * PI,
            coupling_weight: 10.0,
            output_gain: 0.5,
            amplitude_gain: 10.0,
            convention: PhaseConvention::SourceMinusTarget,
            motor_readout: MotorReadout::Offset,
            drive_map: DriveMap::default(),
        }
    }
}

impl CpgParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_segments == 0 {
            return Err(Error::config("n_segments must be at least 1"));
        }
        if !(self.amplitude_gain > 0.0) {
            return Err(Error::config("amplitude_gain must be positive"));
        }
        if !self.coupling_weight.is_finite() || !self.output_gain.is_finite() || !self.total_phase_lag.is_finite() {
            return Err(Error::config("cpg parameters must be finite"));
        }
        self.drive_map.validate()
    }

    pub fn n_oscillators(&self) -> usize {
        2 * self.n_segments
    }

    pub fn topology(&self) -> Result<ChainTopology> {
        Ok(build_topology(
            self.n_segments,
            self.total_phase_lag,
            self.coupling_weight,
            self.output_gain,
        )?
        .with_convention(self.convention))
    }

    /// Per-oscillator parameters for a drive: left oscillators follow
    /// `d_left`, right ones `d_right`.
    pub fn oscillator_params(&self, drive: DriveSignal) -> Vec<OscillatorParams> {
        let (wl, rl) = self.drive_map.saturate(drive.d_left);
        let (wr, rr) = self.drive_map.saturate(drive.d_right);
        (0..self.n_oscillators())
            .map(|i| {
                let (omega, amplitude) = if ChainTopology::is_right(i) { (wr, rr) } else { (wl, rl) };
                OscillatorParams {
                    a: self.amplitude_gain,
                    omega,
                    amplitude,
                }
            })
            .collect()
    }

    /// Steady-state joint phase lag expected from the topology (rad).
    pub fn segment_lag(&self) -> f64 {
        self.total_phase_lag / self.n_segments as f64
    }
}

/// Non-spiking Cartesian CPG advanced with a fixed-step integrator.
#[derive(Clone, Debug)]
pub struct ReferenceCpg {
    params: CpgParams,
    topology: ChainTopology,
    oscillators: Vec<OscillatorParams>,
    state: Vec<CartOscState>,
    method: Method,
    t: f64,
}

impl ReferenceCpg {
    pub fn new(params: CpgParams, initial: Vec<CartOscState>, method: Method) -> Result<Self> {
        params.validate()?;
        if initial.len() != params.n_oscillators() {
            return Err(Error::Shape(format!(
                "{} initial states for {} oscillators",
                initial.len(),
                params.n_oscillators()
            )));
        }
        let topology = params.topology()?;
        let oscillators = params.oscillator_params(DriveSignal::default());
        Ok(Self {
            params,
            topology,
            oscillators,
            state: initial,
            method,
            t: 0.0,
        })
    }

    /// Starts from small seeded random points around the origin.
    pub fn seeded(params: CpgParams, seed: u64, method: Method) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
        let initial = (0..params.n_oscillators())
            .map(|_| CartOscState::from_polar(rng.random_range(0.01..0.05), rng.random_range(-PI..PI)))
            .collect();
        Self::new(params, initial, method)
    }

    pub fn set_drive(&mut self, drive: DriveSignal) {
        self.oscillators = self.params.oscillator_params(drive);
    }

    /// Advances by `dt`; `forcing` lists additive velocities per oscillator.
    pub fn step(&mut self, dt: f64, forcing: &[(usize, [f64; 2])]) -> Result<()> {
        let next = if forcing.is_empty() {
            integrate_step_forced(
                &CpgState::Cartesian(std::mem::take(&mut self.state)),
                &self.oscillators,
                &self.topology,
                dt,
                self.method,
                None,
            )
        } else {
            let mut f = vec![(0.0, 0.0); self.state.len()];
            for &(i, v) in forcing {
                let slot = f.get_mut(i).ok_or_else(|| {
                    Error::config(format!("forcing targets unknown oscillator {i}"))
                })?;
                slot.0 += v[0];
                slot.1 += v[1];
            }
            integrate_step_forced(
                &CpgState::Cartesian(self.state.clone()),
                &self.oscillators,
                &self.topology,
                dt,
                self.method,
                Some(&f),
            )
        };
        self.t += dt;
        match next {
            Ok(CpgState::Cartesian(s)) => {
                self.state = s;
                Ok(())
            }
            Ok(CpgState::Phase(_)) => unreachable!(),
            Err(Error::Divergence { module, detail, .. }) => Err(Error::Divergence {
                module,
                time: self.t,
                detail,
            }),
            Err(e) => Err(e),
        }
    }

    pub fn states(&self) -> &[CartOscState] {
        &self.state
    }

    pub fn psi(&self) -> Vec<f64> {
        motor_output_with(&self.state, &self.topology, self.params.motor_readout)
    }

    pub fn topology(&self) -> &ChainTopology {
        &self.topology
    }

    pub fn params(&self) -> &CpgParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}
