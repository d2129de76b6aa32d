use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::body::{BodyConfig, FluidField};
use crate::cpg::{DriveSignal, Method};
use crate::error::{Error, Result};
use crate::pilot::{DriveSchedule, SteeringConfig};
use crate::scpg::{PerturbationSpec, ProbeKind, ScpgConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    IsolatedCpg,
    SwimBasic,
    SwimNeuronSweep,
    SwimSteered,
    BarrierOpenLoop,
    BarrierSteered,
    Perturbation,
    AsymmetricDrive,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 8] = [
        ScenarioId::IsolatedCpg,
        ScenarioId::SwimBasic,
        ScenarioId::SwimNeuronSweep,
        ScenarioId::SwimSteered,
        ScenarioId::BarrierOpenLoop,
        ScenarioId::BarrierSteered,
        ScenarioId::Perturbation,
        ScenarioId::AsymmetricDrive,
    ];

    /// Whether the CPG drives the swimming body.
    pub fn has_body(self) -> bool {
        matches!(
            self,
            ScenarioId::SwimBasic
                | ScenarioId::SwimNeuronSweep
                | ScenarioId::SwimSteered
                | ScenarioId::BarrierOpenLoop
                | ScenarioId::BarrierSteered
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::IsolatedCpg => "isolated_cpg",
            ScenarioId::SwimBasic => "swim_basic",
            ScenarioId::SwimNeuronSweep => "swim_neuron_sweep",
            ScenarioId::SwimSteered => "swim_steered",
            ScenarioId::BarrierOpenLoop => "barrier_open_loop",
            ScenarioId::BarrierSteered => "barrier_steered",
            ScenarioId::Perturbation => "perturbation",
            ScenarioId::AsymmetricDrive => "asymmetric_drive",
        }
    }
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// The non-spiking oscillator equations.
    #[default]
    Ideal,
    Spiking,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Backend::Ideal),
            "spiking" => Ok(Backend::Spiking),
            _ => Err(Error::config(format!("unknown backend `{s}` (expected ideal or spiking)"))),
        }
    }
}

/// Everything needed to rerun a scenario exactly.
///
/// The top-level `seed` overrides `network.seed`; `network.dt` is the step
/// of the whole closed loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub backend: Backend,
    /// s
    pub duration: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Start-up time excluded from steady-state metrics (s).
    pub transient: f64,
    /// Integrator of the ideal backend.
    pub ideal_method: Method,
    pub drive: DriveSchedule,
    /// Closed-loop heading control; replaces `drive` when present.
    pub steering: Option<SteeringConfig>,
    /// Time constant of the heading low-pass used by steering and metrics (s).
    pub heading_filter_tau: f64,
    pub fluid: FluidField,
    pub perturbations: Vec<PerturbationSpec>,
    /// Population sizes of the neuron sweep.
    pub sweep_neurons: Vec<usize>,
    pub network: ScpgConfig,
    pub body: BodyConfig,
}

/// Opposing current with a cross-stream gradient. A uniform current alone
/// only carries the body along; the shear turns it.
pub fn barrier_field() -> FluidField {
    FluidField {
        current_velocity: [-0.1, 0.0],
        gradient: [[0.0, 0.5], [0.0, 0.0]],
    }
}

impl ScenarioConfig {
    /// Defaults for one scenario.
    pub fn preset(scenario: ScenarioId) -> Self {
        let base_drive = DriveSignal::symmetric(3.0);
        let mut c = Self {
            scenario,
            backend: Backend::Ideal,
            duration: 20.0,
            seed: 0,
            output_dir: PathBuf::from("out").join(scenario.name()),
            transient: 3.0,
            ideal_method: Method::Rk4,
            drive: DriveSchedule::constant(base_drive),
            steering: None,
            heading_filter_tau: 0.5,
            fluid: FluidField::default(),
            perturbations: Vec::new(),
            sweep_neurons: vec![500, 1000, 2000],
            network: ScpgConfig {
                probes: vec![ProbeKind::Spikes {
                    oscillator: 0,
                    max_neurons: 50,
                }],
                ..ScpgConfig::default()
            },
            body: BodyConfig::default(),
        };
        match scenario {
            ScenarioId::IsolatedCpg => c.duration = 10.0,
            ScenarioId::SwimBasic => {}
            ScenarioId::SwimNeuronSweep => {
                c.backend = Backend::Spiking;
                c.duration = 10.0;
            }
            ScenarioId::SwimSteered => {
                c.steering = Some(SteeringConfig {
                    r_z_target: 0.5,
                    ..SteeringConfig::default()
                });
            }
            ScenarioId::BarrierOpenLoop => {
                c.duration = 30.0;
                c.fluid = barrier_field();
            }
            ScenarioId::BarrierSteered => {
                c.duration = 30.0;
                c.fluid = barrier_field();
                c.steering = Some(SteeringConfig::default());
            }
            ScenarioId::Perturbation => {
                c.duration = 10.0;
                c.perturbations = vec![PerturbationSpec {
                    oscillator_index: 5,
                    t_start: 4.8,
                    t_end: 5.0,
                    injected_value: [0.5, 0.0],
                }];
            }
            ScenarioId::AsymmetricDrive => {
                c.duration = 10.0;
                c.drive = DriveSchedule::switch_at(5.0, base_drive, DriveSignal::new(1.5, 4.5));
            }
        }
        c
    }

    /// Parses a TOML document over the preset named by its `scenario` key.
    /// Tables merge key by key; arrays and scalars replace the preset value.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e| Error::config(format!("{e}")))?;
        let id = user
            .get("scenario")
            .cloned()
            .ok_or_else(|| Error::config("missing `scenario`"))?;
        let id: ScenarioId = id
            .try_into()
            .map_err(|e| Error::config(format!("unknown scenario: {e}")))?;
        let mut merged = toml::Value::try_from(Self::preset(id)).map_err(|e| Error::config(format!("{e}")))?;
        merge(&mut merged, toml::Value::Table(user));
        let config: Self = merged.try_into().map_err(|e| Error::config(format!("{e}")))?;
        Ok(config.resolved())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(format!("cannot serialise config: {e}")))
    }

    /// Copies the top-level seed into the network config.
    pub fn resolved(mut self) -> Self {
        self.network.seed = self.seed;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.resolved()
    }

    pub fn dt(&self) -> f64 {
        self.network.dt
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt()).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::config(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.transient >= 0.0) {
            return Err(Error::config("transient must be >= 0"));
        }
        if !(self.heading_filter_tau >= 0.0) || !self.heading_filter_tau.is_finite() {
            return Err(Error::config("heading_filter_tau must be >= 0"));
        }
        if self.network.seed != self.seed {
            return Err(Error::config(format!(
                "network.seed {} differs from seed {}; the top-level seed is authoritative",
                self.network.seed, self.seed
            )));
        }
        self.network.validate()?;
        self.drive.validate()?;
        self.fluid.validate()?;
        self.body.validate()?;
        if self.body.n_links != self.network.cpg.n_segments + 1 {
            return Err(Error::config(format!(
                "body has {} links but the cpg has {} segments (need n_segments + 1 links)",
                self.body.n_links, self.network.cpg.n_segments
            )));
        }
        if let Some(s) = &self.steering {
            s.validate(&self.network.cpg.drive_map)?;
        }
        for p in &self.perturbations {
            p.validate(self.network.cpg.n_oscillators())?;
        }
        if self.scenario == ScenarioId::SwimNeuronSweep && (self.sweep_neurons.is_empty() || self.sweep_neurons.contains(&0)) {
            return Err(Error::config("sweep_neurons needs at least one positive population size"));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for id in ScenarioId::ALL {
            let c = ScenarioConfig::preset(id).resolved();
            c.validate().unwrap();
            let text = c.to_toml().unwrap();
            let back = ScenarioConfig::from_toml_str(&text).unwrap();
            assert_eq!(back, c, "{id}");
            let json = serde_json::to_string(&c).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn overrides_merge_into_preset() {
        let c = ScenarioConfig::from_toml_str(
            r#"
            scenario = "swim_basic"
            duration = 2.5
            seed = 7
            [body.pd]
            kp = 3.0
            "#,
        )
        .unwrap();
        assert_eq!(c.duration, 2.5);
        assert_eq!(c.body.pd.kp, 3.0);
        assert_eq!(c.body.pd.kd, BodyConfig::default().pd.kd);
        assert_eq!(c.network.seed, 7);
        assert_eq!(c.body.n_links, 9);
    }

    #[test]
    fn bad_documents() {
        assert!(matches!(ScenarioConfig::from_toml_str("duration = 1.0"), Err(Error::Config(_))));
        assert!(matches!(ScenarioConfig::from_toml_str("scenario = \"nope\""), Err(Error::Config(_))));
        assert!(matches!(
            ScenarioConfig::from_toml_str("scenario = \"swim_basic\"\nbogus = 1"),
            Err(Error::Config(_))
        ));
        let c = ScenarioConfig::from_toml_str("scenario = \"swim_basic\"\nduration = -1.0").unwrap();
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::preset(ScenarioId::SwimBasic);
        c.body.n_links = 5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn ten_seconds_is_ten_thousand_steps() {
        assert_eq!(ScenarioConfig::preset(ScenarioId::IsolatedCpg).n_steps(), 10_000);
    }
}
