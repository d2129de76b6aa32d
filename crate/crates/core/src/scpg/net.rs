use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::domain::{coupling_points, oscillator_points};
use super::config::{ProbeKind, ScpgConfig, MIN_RECOMMENDED_NEURONS};
use super::targets::{coupling_term, drive_target, oscillator_feedback};
use crate::cpg::{motor_output_with, CartOscState, ChainTopology, DriveSignal};
use crate::error::{Error, Result};
use crate::nef::{
    default_eval_count, eval_points, ConnectionId, DecoderSolver, EnsembleId, Network, NodeId, Population,
    PopulationSpec, SolveStats, Source, Synapse, Target, Transform,
};

/// Additive `(x, y)` input bias on one oscillator population over
/// `[t_start, t_end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub oscillator_index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub injected_value: [f64; 2],
}

impl PerturbationSpec {
    pub fn validate(&self, n_oscillators: usize) -> Result<()> {
        if self.oscillator_index >= n_oscillators {
            return Err(Error::config(format!(
                "perturbation targets oscillator {} of {n_oscillators}",
                self.oscillator_index
            )));
        }
        if !(self.t_start < self.t_end) {
            return Err(Error::config(format!(
                "perturbation window [{}, {}) is empty",
                self.t_start, self.t_end
            )));
        }
        if !self.injected_value.iter().all(|v| v.is_finite()) {
            return Err(Error::config("perturbation value must be finite"));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }

    /// Equivalent additive velocity on the exact model. A represented-space
    /// bias `b` enters through the recurrent synapse as `b / tau`.
    pub fn ideal_forcing(&self, tau: f64) -> [f64; 2] {
        [self.injected_value[0] / tau, self.injected_value[1] / tau]
    }
}

#[derive(Clone, Debug)]
pub struct OscPopulationHandle {
    pub ensemble: EnsembleId,
    pub recurrent: ConnectionId,
    pub readout: ConnectionId,
    pub to_coupling: Option<ConnectionId>,
    pub feedback_fit: SolveStats,
    pub readout_fit: SolveStats,
}

#[derive(Clone, Debug)]
pub struct CouplingPopulationHandle {
    pub target: usize,
    pub source: usize,
    pub ensemble: EnsembleId,
    pub output: ConnectionId,
    pub fit: SolveStats,
}

#[derive(Clone, Debug)]
pub struct DriveHandle {
    pub node: NodeId,
    pub ensemble: Option<EnsembleId>,
    pub output: ConnectionId,
}

/// Recorded probe output.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeData {
    /// `rows[k] = [t, values...]`.
    Series { columns: Vec<String>, rows: Vec<Vec<f64>> },
    /// `(t, neuron)` events.
    Spikes(Vec<(f64, usize)>),
}

#[derive(Clone, Debug, Default)]
struct Recorder {
    psi: Option<Vec<Vec<f64>>>,
    xy: Option<Vec<Vec<f64>>>,
    spikes: BTreeMap<usize, (usize, Vec<(f64, usize)>)>,
}

/// Spiking double-chain CPG.
#[derive(Clone, Debug)]
pub struct ScpgNetwork {
    config: ScpgConfig,
    topology: ChainTopology,
    net: Network,
    oscillators: Vec<OscPopulationHandle>,
    couplings: Vec<CouplingPopulationHandle>,
    drives: [DriveHandle; 2],
    recorder: Recorder,
    bias: Vec<[f64; 2]>,
}

fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds the network and solves every decoder.
pub fn build_scpg(config: ScpgConfig) -> Result<ScpgNetwork> {
    ScpgNetwork::build(config)
}

impl ScpgNetwork {
    pub fn build(config: ScpgConfig) -> Result<Self> {
        config.validate()?;
        let n = config.neurons_per_population;
        if n < MIN_RECOMMENDED_NEURONS {
            log::warn!("{n} neurons per population is below {MIN_RECOMMENDED_NEURONS}; decoding will be poor");
        }
        let topology = config.cpg.topology()?;
        let n_osc = topology.n_oscillators();
        let tau = config.synapse;
        let omega_scale = config.omega_scale();
        let a = config.cpg.amplitude_gain;
        let r_max = config.cpg.drive_map.amplitude_max();
        let mut net = Network::new(config.dt)?;
        let mut next_seed = 0u64;
        let mut population = |dims: usize, radius: f64| -> Result<Population> {
            let spec = PopulationSpec {
                n_neurons: n,
                dimensions: dims,
                radius,
                max_rate_range: config.max_rate_range,
                intercept_range: config.intercept_range,
                seed: derive_seed(config.seed, next_seed),
            };
            next_seed += 1;
            Population::generate(spec, config.lif)
        };
        let n_eval = |dims: usize| config.eval_points.unwrap_or_else(|| default_eval_count(n, dims));

        let mut osc_ensembles = Vec::with_capacity(n_osc);
        let mut osc_fits = Vec::with_capacity(n_osc);
        for i in 0..n_osc {
            let name = format!("oscillator_{i}");
            let pop = population(4, config.oscillator_radius())?;
            let points = oscillator_points(&pop, config.eval_domain, n_eval(4), r_max);
            let solver = DecoderSolver::new(&name, &pop, points, config.regularization)?;
            let feedback = solver.solve(format!("{name}/feedback"), |v| {
                oscillator_feedback(v, a, omega_scale, tau.tau).to_vec()
            })?;
            let xy = solver.solve(format!("{name}/xy"), |v| v[..2].to_vec())?;
            let e = net.add_ensemble(&name, pop, config.neuron_mode);
            osc_ensembles.push(e);
            osc_fits.push((feedback, xy));
        }

        let mut oscillators = Vec::with_capacity(n_osc);
        for (i, (feedback, xy)) in osc_fits.iter().enumerate() {
            let e = osc_ensembles[i];
            let recurrent = net.connect(
                format!("oscillator_{i}/recurrent"),
                Source::Ensemble(e),
                Some(feedback.decoders.clone()),
                tau,
                vec![Target { ensemble: e, transform: Transform::identity(4) }],
            )?;
            let readout = net.connect(
                format!("oscillator_{i}/readout"),
                Source::Ensemble(e),
                Some(xy.decoders.clone()),
                Synapse::new(config.readout_tau)?,
                vec![],
            )?;
            oscillators.push(OscPopulationHandle {
                ensemble: e,
                recurrent,
                readout,
                to_coupling: None,
                feedback_fit: feedback.stats,
                readout_fit: xy.stats,
            });
        }

        let mut couplings = Vec::with_capacity(topology.couplings.len());
        let mut fan_out: Vec<Vec<Target>> = vec![Vec::new(); n_osc];
        for c in &topology.couplings {
            let name = format!("coupling_{}_from_{}", c.target, c.source);
            let pop = population(4, config.coupling_radius())?;
            let points = coupling_points(&pop, config.eval_domain, n_eval(4), r_max);
            let solver = DecoderSolver::new(&name, &pop, points, config.regularization)?;
            let (w, phi, conv) = (c.weight, c.phase_bias, topology.convention);
            let fit = solver.solve(format!("{name}/term"), |v| coupling_term(v, w, phi, conv, tau.tau).to_vec())?;
            let e = net.add_ensemble(&name, pop, config.neuron_mode);
            let output = net.connect(
                format!("{name}/output"),
                Source::Ensemble(e),
                Some(fit.decoders),
                tau,
                vec![Target { ensemble: osc_ensembles[c.target], transform: Transform::embed(4, 2, 0, 1.0)? }],
            )?;
            fan_out[c.target].push(Target { ensemble: e, transform: Transform::embed(4, 2, 0, 1.0)? });
            fan_out[c.source].push(Target { ensemble: e, transform: Transform::embed(4, 2, 2, 1.0)? });
            couplings.push(CouplingPopulationHandle {
                target: c.target,
                source: c.source,
                ensemble: e,
                output,
                fit: fit.stats,
            });
        }
        for (i, targets) in fan_out.into_iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let decoders = net.connection(oscillators[i].readout).decoders.clone();
            oscillators[i].to_coupling = Some(net.connect(
                format!("oscillator_{i}/to_coupling"),
                Source::Ensemble(osc_ensembles[i]),
                decoders,
                Synapse::new(config.coupling_input_tau)?,
                targets,
            )?);
        }

        let mut drive_handles = Vec::with_capacity(2);
        for side in ["left", "right"] {
            let targets: Vec<Target> = (0..n_osc)
                .filter(|&i| ChainTopology::is_right(i) == (side == "right"))
                .map(|i| Ok(Target { ensemble: osc_ensembles[i], transform: Transform::embed(4, 2, 2, 1.0)? }))
                .collect::<Result<_>>()?;
            let handle = if config.drive_passthrough {
                let node = net.add_node(format!("drive_{side}_targets"), 2);
                let output = net.connect(format!("drive_{side}/output"), Source::Node(node), None, tau, targets)?;
                DriveHandle { node, ensemble: None, output }
            } else {
                let name = format!("drive_{side}");
                let node = net.add_node(format!("{name}_input"), 1);
                let pop = population(1, config.drive_radius())?;
                let solver = DecoderSolver::new(&name, &pop, eval_points(&pop, n_eval(1)), config.regularization)?;
                let map = config.cpg.drive_map;
                let fit = solver.solve(format!("{name}/targets"), |v| drive_target(v[0], &map, omega_scale).to_vec())?;
                let e = net.add_ensemble(&name, pop, config.neuron_mode);
                net.connect(
                    format!("{name}/input"),
                    Source::Node(node),
                    None,
                    Synapse::new(config.drive_input_tau)?,
                    vec![Target { ensemble: e, transform: Transform::identity(1) }],
                )?;
                let output = net.connect(format!("{name}/output"), Source::Ensemble(e), Some(fit.decoders), tau, targets)?;
                DriveHandle { node, ensemble: Some(e), output }
            };
            drive_handles.push(handle);
        }
        let drives: [DriveHandle; 2] = drive_handles.try_into().expect("two sides");

        net.randomize_state(derive_seed(config.seed, u64::MAX));

        let mut recorder = Recorder::default();
        for p in &config.probes {
            match *p {
                ProbeKind::Psi => recorder.psi = Some(Vec::new()),
                ProbeKind::DecodedXy => recorder.xy = Some(Vec::new()),
                ProbeKind::Spikes { oscillator, max_neurons } => {
                    recorder.spikes.insert(oscillator, (max_neurons, Vec::new()));
                }
            }
        }

        Ok(Self {
            bias: vec![[0.0; 2]; n_osc],
            config,
            topology,
            net,
            oscillators,
            couplings,
            drives,
            recorder,
        })
    }

    pub fn config(&self) -> &ScpgConfig {
        &self.config
    }

    pub fn topology(&self) -> &ChainTopology {
        &self.topology
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn oscillators(&self) -> &[OscPopulationHandle] {
        &self.oscillators
    }

    pub fn couplings(&self) -> &[CouplingPopulationHandle] {
        &self.couplings
    }

    pub fn drives(&self) -> &[DriveHandle; 2] {
        &self.drives
    }

    /// Oscillator, coupling and drive population counts.
    pub fn population_counts(&self) -> (usize, usize, usize) {
        let drive = self.drives.iter().filter(|d| d.ensemble.is_some()).count();
        (self.oscillators.len(), self.couplings.len(), drive)
    }

    pub fn time(&self) -> f64 {
        self.net.time()
    }

    pub fn dt(&self) -> f64 {
        self.net.dt()
    }

    /// Readout-filtered decoded oscillator states.
    pub fn decoded_xy(&self) -> Vec<CartOscState> {
        self.oscillators
            .iter()
            .map(|o| {
                let v = self.net.output(o.readout);
                CartOscState::new(v[0], v[1])
            })
            .collect()
    }

    /// Decoded drive targets `[omega / omega_scale, R]` per side.
    pub fn decoded_drive(&self) -> [[f64; 2]; 2] {
        let get = |h: &DriveHandle| {
            let v = self.net.output(h.output);
            [v[0], v[1]]
        };
        [get(&self.drives[0]), get(&self.drives[1])]
    }

    pub fn psi(&self) -> Vec<f64> {
        motor_output_with(&self.decoded_xy(), &self.topology, self.config.cpg.motor_readout)
    }

    /// Advances one step and returns the joint setpoints.
    pub fn step(&mut self, drive: DriveSignal, perturbations: &[PerturbationSpec]) -> Result<Vec<f64>> {
        let n_osc = self.oscillators.len();
        for (side, d) in [drive.d_left, drive.d_right].into_iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::config(format!("drive must be finite, got {d}")));
            }
            let h = &self.drives[side];
            if h.ensemble.is_some() {
                self.net.set_node(h.node, &[d])?;
            } else {
                let map = self.config.cpg.drive_map;
                self.net.set_node(h.node, &drive_target(d, &map, self.config.omega_scale()))?;
            }
        }

        let t = self.net.time();
        let mut bias = vec![[0.0; 2]; n_osc];
        for p in perturbations {
            p.validate(n_osc)?;
            if p.is_active(t) {
                bias[p.oscillator_index][0] += p.injected_value[0];
                bias[p.oscillator_index][1] += p.injected_value[1];
            }
        }
        for (i, b) in bias.iter().enumerate() {
            if *b != self.bias[i] {
                self.net.set_bias(self.oscillators[i].ensemble, &[b[0], b[1], 0.0, 0.0])?;
            }
        }
        self.bias = bias;

        self.net.step()?;
        let t = self.net.time();
        let xy = self.decoded_xy();
        let psi = motor_output_with(&xy, &self.topology, self.config.cpg.motor_readout);
        if let Some(rows) = &mut self.recorder.psi {
            let mut row = Vec::with_capacity(psi.len() + 1);
            row.push(t);
            row.extend_from_slice(&psi);
            rows.push(row);
        }
        if let Some(rows) = &mut self.recorder.xy {
            let mut row = Vec::with_capacity(2 * xy.len() + 1);
            row.push(t);
            for s in &xy {
                row.push(s.x);
                row.push(s.y);
            }
            rows.push(row);
        }
        for (&osc, (limit, events)) in &mut self.recorder.spikes {
            for &neuron in self.net.ensemble(self.oscillators[osc].ensemble).spiked() {
                if neuron < *limit {
                    events.push((t, neuron));
                }
            }
        }
        Ok(psi)
    }

    /// Recorded series for a probe registered at build time.
    pub fn probe(&self, what: ProbeKind) -> Result<ProbeData> {
        let missing = || Error::config(format!("probe {what:?} was not registered"));
        match what {
            ProbeKind::Psi => {
                let rows = self.recorder.psi.as_ref().ok_or_else(missing)?;
                let mut columns = vec!["t".to_string()];
                columns.extend((0..self.topology.n_segments).map(|k| format!("psi_{k}")));
                Ok(ProbeData::Series { columns, rows: rows.clone() })
            }
            ProbeKind::DecodedXy => {
                let rows = self.recorder.xy.as_ref().ok_or_else(missing)?;
                let mut columns = vec!["t".to_string()];
                for i in 0..self.oscillators.len() {
                    columns.push(format!("x_{i}"));
                    columns.push(format!("y_{i}"));
                }
                Ok(ProbeData::Series { columns, rows: rows.clone() })
            }
            ProbeKind::Spikes { oscillator, max_neurons } => match self.recorder.spikes.get(&oscillator) {
                Some((limit, events)) if *limit == max_neurons => Ok(ProbeData::Spikes(events.clone())),
                _ => Err(missing()),
            },
        }
    }
}
