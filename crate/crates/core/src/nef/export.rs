use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lif::LifParams;
use super::network::{Network, NeuronMode, Source};
use crate::error::{Error, Result};

/// Shape-annotated row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub name: String,
    pub mode: NeuronMode,
    pub radius: f64,
    pub seed: u64,
    pub lif: LifParams,
    /// `n_neurons x dimensions`.
    pub encoders: MatrixRecord,
    pub gains: Vec<f64>,
    pub biases: Vec<f64>,
    pub max_rates: Vec<f64>,
    pub intercepts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub ensemble: String,
    pub transform: MatrixRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionRecord {
    pub name: String,
    pub source: String,
    pub synapse_tau: f64,
    pub decoder_label: Option<String>,
    /// `n_neurons x output_dims`.
    pub decoders: Option<MatrixRecord>,
    pub targets: Vec<TargetRecord>,
}

/// Factored weights of a whole network, suitable for JSON round trips.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub dt: f64,
    pub ensembles: Vec<EnsembleRecord>,
    pub connections: Vec<ConnectionRecord>,
}

impl NetworkRecord {
    pub fn from_network(net: &Network) -> Self {
        let ensembles = net
            .ensembles()
            .iter()
            .map(|e| {
                let p = &e.population;
                EnsembleRecord {
                    name: e.name.clone(),
                    mode: e.mode,
                    radius: p.radius(),
                    seed: p.spec.seed,
                    lif: p.lif,
                    encoders: MatrixRecord {
                        rows: p.n_neurons(),
                        cols: p.dimensions(),
                        data: p.encoders.clone(),
                    },
                    gains: p.gains.clone(),
                    biases: p.biases.clone(),
                    max_rates: p.max_rates.clone(),
                    intercepts: p.intercepts.clone(),
                }
            })
            .collect();
        let connections = net
            .connections()
            .iter()
            .map(|c| ConnectionRecord {
                name: c.name.clone(),
                source: match c.source {
                    Source::Ensemble(id) => net.ensemble(id).name.clone(),
                    Source::Node(id) => net.node(id).name.clone(),
                },
                synapse_tau: c.synapse.tau,
                decoder_label: c.decoders.as_ref().map(|d| d.label.clone()),
                decoders: c.decoders.as_ref().map(|d| MatrixRecord {
                    rows: d.n_neurons,
                    cols: d.output_dims,
                    data: d.weights.clone(),
                }),
                targets: c
                    .targets
                    .iter()
                    .map(|t| TargetRecord {
                        ensemble: net.ensemble(t.ensemble).name.clone(),
                        transform: MatrixRecord {
                            rows: t.transform.rows,
                            cols: t.transform.cols,
                            data: t.transform.data.clone(),
                        },
                    })
                    .collect(),
            })
            .collect();
        Self {
            dt: net.dt(),
            ensembles,
            connections,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}
