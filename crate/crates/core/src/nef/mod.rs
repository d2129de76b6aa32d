//! Neural Engineering Framework primitives and a fixed-step spiking simulator.

mod decoders;
mod dynamics;
mod export;
mod lif;
mod network;
mod population;
mod synapse;

pub use decoders::{
    activity_matrix, decode, default_eval_count, eval_points, solve_decoders, DecoderMatrix, DecoderSolver, SolveStats,
    Solved,
};
pub use dynamics::{input_scale, recurrent_transform};
pub use export::{ConnectionRecord, EnsembleRecord, MatrixRecord, NetworkRecord, TargetRecord};
pub use lif::{lif_rate, LifParams};
pub use network::{
    Connection, ConnectionId, Ensemble, EnsembleId, Network, NeuronMode, Node, NodeId, Source, Target, Transform,
};
pub use population::{sample_ball, sample_sphere, Population, PopulationSpec};
pub use synapse::{Lowpass, Synapse};
