use serde::{Deserialize, Serialize};

use super::decoders::DecoderMatrix;
use super::lif::lif_rate;
use super::population::Population;
use super::synapse::{Lowpass, Synapse};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConnectionId(pub usize);

/// Spiking LIF dynamics or the steady-state rate approximation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuronMode {
    #[default]
    Spiking,
    Rate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Ensemble(EnsembleId),
    Node(NodeId),
}

/// Dense `rows x cols` matrix mapping a decoded value into a target input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Transform {
    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = s;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("transform rows must be non-empty and equal length".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    /// Places `src` (of length `cols`) into dimensions `offset..` of a
    /// `rows`-dimensional target, scaled by `s`.
    pub fn embed(rows: usize, cols: usize, offset: usize, s: f64) -> Result<Self> {
        if offset + cols > rows {
            return Err(Error::Shape(format!("cannot embed {cols} dims at {offset} into {rows}")));
        }
        let mut data = vec![0.0; rows * cols];
        for k in 0..cols {
            data[(offset + k) * cols + k] = s;
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub ensemble: EnsembleId,
    pub transform: Transform,
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    pub name: String,
    pub population: Population,
    pub mode: NeuronMode,
    /// Additive offset on the represented-space input.
    pub bias: Vec<f64>,
    input: Vec<f64>,
    currents: Vec<f64>,
    activity: Vec<f64>,
    spiked: Vec<usize>,
}

impl Ensemble {
    pub fn input(&self) -> &[f64] {
        &self.input
    }

    /// Neurons that fired during the last step.
    pub fn spiked(&self) -> &[usize] {
        &self.spiked
    }

    /// Rates from the last step in rate mode.
    pub fn rates(&self) -> &[f64] {
        &self.activity
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub name: String,
    pub value: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Connection {
    pub name: String,
    pub source: Source,
    pub decoders: Option<DecoderMatrix>,
    pub synapse: Synapse,
    pub targets: Vec<Target>,
    raw: Vec<f64>,
    filter: Lowpass,
}

impl Connection {
    pub fn output(&self) -> &[f64] {
        self.filter.value()
    }

    pub fn dims(&self) -> usize {
        self.raw.len()
    }
}

/// Fixed-step simulator of ensembles, value nodes and filtered connections.
///
/// All ensembles read the connection outputs of the previous step, so the
/// update order inside a step does not matter.
#[derive(Clone, Debug)]
pub struct Network {
    dt: f64,
    time: f64,
    ensembles: Vec<Ensemble>,
    nodes: Vec<Node>,
    connections: Vec<Connection>,
}

impl Network {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config(format!("time step must be > 0, got {dt}")));
        }
        Ok(Self {
            dt,
            time: 0.0,
            ensembles: Vec::new(),
            nodes: Vec::new(),
            connections: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn add_ensemble(&mut self, name: impl Into<String>, population: Population, mode: NeuronMode) -> EnsembleId {
        let n = population.n_neurons();
        let d = population.dimensions();
        self.ensembles.push(Ensemble {
            name: name.into(),
            population,
            mode,
            bias: vec![0.0; d],
            input: vec![0.0; d],
            currents: vec![0.0; n],
            activity: vec![0.0; n],
            spiked: Vec::new(),
        });
        EnsembleId(self.ensembles.len() - 1)
    }

    pub fn add_node(&mut self, name: impl Into<String>, dims: usize) -> NodeId {
        self.nodes.push(Node {
            name: name.into(),
            value: vec![0.0; dims],
        });
        NodeId(self.nodes.len() - 1)
    }

    fn source_dims(&self, source: Source, decoders: Option<&DecoderMatrix>) -> Result<usize> {
        match (source, decoders) {
            (Source::Ensemble(e), Some(d)) => {
                let ens = self
                    .ensembles
                    .get(e.0)
                    .ok_or_else(|| Error::config(format!("unknown ensemble {}", e.0)))?;
                if d.n_neurons != ens.population.n_neurons() {
                    return Err(Error::Shape(format!(
                        "decoders `{}` have {} rows, ensemble `{}` has {} neurons",
                        d.label,
                        d.n_neurons,
                        ens.name,
                        ens.population.n_neurons()
                    )));
                }
                Ok(d.output_dims)
            }
            (Source::Ensemble(_), None) => Err(Error::config("ensemble connections need decoders")),
            (Source::Node(n), None) => self
                .nodes
                .get(n.0)
                .map(|n| n.value.len())
                .ok_or_else(|| Error::config(format!("unknown node {}", n.0))),
            (Source::Node(_), Some(_)) => Err(Error::config("node connections take no decoders")),
        }
    }

    pub fn connect(
        &mut self,
        name: impl Into<String>,
        source: Source,
        decoders: Option<DecoderMatrix>,
        synapse: Synapse,
        targets: Vec<Target>,
    ) -> Result<ConnectionId> {
        let name = name.into();
        let dims = self.source_dims(source, decoders.as_ref())?;
        for t in &targets {
            let ens = self
                .ensembles
                .get(t.ensemble.0)
                .ok_or_else(|| Error::config(format!("connection `{name}` targets unknown ensemble")))?;
            if t.transform.cols != dims || t.transform.rows != ens.population.dimensions() {
                return Err(Error::Shape(format!(
                    "connection `{name}`: transform {}x{} between {dims}-d source and {}-d `{}`",
                    t.transform.rows,
                    t.transform.cols,
                    ens.population.dimensions(),
                    ens.name
                )));
            }
        }
        self.connections.push(Connection {
            name,
            source,
            decoders,
            synapse,
            targets,
            raw: vec![0.0; dims],
            filter: Lowpass::new(synapse, self.dt, dims),
        });
        Ok(ConnectionId(self.connections.len() - 1))
    }

    pub fn set_node(&mut self, id: NodeId, value: &[f64]) -> Result<()> {
        let node = &mut self.nodes[id.0];
        if node.value.len() != value.len() {
            return Err(Error::Shape(format!(
                "node `{}` is {}-d, got {} values",
                node.name,
                node.value.len(),
                value.len()
            )));
        }
        node.value.copy_from_slice(value);
        Ok(())
    }

    pub fn set_bias(&mut self, id: EnsembleId, bias: &[f64]) -> Result<()> {
        let ens = &mut self.ensembles[id.0];
        if ens.bias.len() != bias.len() {
            return Err(Error::Shape(format!("bias for `{}` has wrong length", ens.name)));
        }
        ens.bias.copy_from_slice(bias);
        Ok(())
    }

    pub fn ensemble(&self, id: EnsembleId) -> &Ensemble {
        &self.ensembles[id.0]
    }

    pub fn ensemble_mut(&mut self, id: EnsembleId) -> &mut Ensemble {
        &mut self.ensembles[id.0]
    }

    pub fn ensembles(&self) -> &[Ensemble] {
        &self.ensembles
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn connection(&self, id: ConnectionId) -> &Connection {
        &self.connections[id.0]
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    /// Filtered decoded output of a connection.
    pub fn output(&self, id: ConnectionId) -> &[f64] {
        self.connections[id.0].output()
    }

    pub fn total_neurons(&self) -> usize {
        self.ensembles.iter().map(|e| e.population.n_neurons()).sum()
    }

    /// Seeds every ensemble's membrane voltages from `seed`.
    pub fn randomize_state(&mut self, seed: u64) {
        for (k, e) in self.ensembles.iter_mut().enumerate() {
            e.population
                .randomize_state(seed.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        }
    }

    /// Advances every ensemble and synapse by one step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        for e in &mut self.ensembles {
            e.input.copy_from_slice(&e.bias);
        }
        for c in &self.connections {
            let y = c.filter.value();
            for t in &c.targets {
                t.transform.apply_add(y, &mut self.ensembles[t.ensemble.0].input);
            }
        }

        for e in &mut self.ensembles {
            let Ensemble {
                population,
                input,
                currents,
                activity,
                spiked,
                mode,
                ..
            } = e;
            population.currents(input, currents);
            match mode {
                NeuronMode::Spiking => population.step_spikes(currents, dt, spiked),
                NeuronMode::Rate => {
                    for (a, j) in activity.iter_mut().zip(currents.iter()) {
                        *a = lif_rate(*j, &population.lif);
                    }
                }
            }
        }

        let inv_dt = 1.0 / dt;
        for c in &mut self.connections {
            c.raw.iter_mut().for_each(|v| *v = 0.0);
            match (c.source, &c.decoders) {
                (Source::Ensemble(id), Some(dec)) => {
                    let e = &self.ensembles[id.0];
                    match e.mode {
                        NeuronMode::Spiking => {
                            for &i in &e.spiked {
                                for (r, w) in c.raw.iter_mut().zip(dec.row(i)) {
                                    *r += w * inv_dt;
                                }
                            }
                        }
                        NeuronMode::Rate => {
                            for (i, a) in e.activity.iter().enumerate() {
                                if *a != 0.0 {
                                    for (r, w) in c.raw.iter_mut().zip(dec.row(i)) {
                                        *r += w * a;
                                    }
                                }
                            }
                        }
                    }
                }
                (Source::Node(id), _) => c.raw.copy_from_slice(&self.nodes[id.0].value),
                (Source::Ensemble(_), None) => unreachable!("validated in connect"),
            }
            c.filter.update(&c.raw);
        }
        self.time += dt;

        for c in &self.connections {
            if c.filter.value().iter().any(|v| !v.is_finite()) {
                let origin = match c.source {
                    Source::Ensemble(id) => self.ensembles[id.0].name.clone(),
                    Source::Node(id) => self.nodes[id.0].name.clone(),
                };
                return Err(Error::divergence(
                    format!("population `{origin}`"),
                    self.time,
                    format!("connection `{}` decoded a non-finite value", c.name),
                ));
            }
        }
        Ok(())
    }

    /// Dense synaptic weights `W[post, pre]` of an ensemble-to-ensemble
    /// connection, row-major `n_post x n_pre`.
    pub fn full_weights(&self, id: ConnectionId, target: usize) -> Result<Vec<f64>> {
        let c = &self.connections[id.0];
        let dec = c
            .decoders
            .as_ref()
            .ok_or_else(|| Error::config(format!("connection `{}` has no decoders", c.name)))?;
        let t = c
            .targets
            .get(target)
            .ok_or_else(|| Error::config(format!("connection `{}` has no target {target}", c.name)))?;
        let post = &self.ensembles[t.ensemble.0].population;
        let (n_post, n_pre, d_post) = (post.n_neurons(), dec.n_neurons, post.dimensions());
        let mut w = vec![0.0; n_post * n_pre];
        let mut mapped = vec![0.0; d_post];
        for j in 0..n_pre {
            mapped.iter_mut().for_each(|v| *v = 0.0);
            t.transform.apply_add(dec.row(j), &mut mapped);
            for i in 0..n_post {
                let e = post.encoder(i);
                let dot: f64 = e.iter().zip(&mapped).map(|(a, b)| a * b).sum();
                w[i * n_pre + j] = post.gains[i] * dot / post.radius();
            }
        }
        Ok(w)
    }
}
