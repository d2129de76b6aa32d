//! Closed-loop scenarios: CPG (ideal or spiking) into the PD-driven body,
//! with scheduled or steered drives, plus artifact output.

mod compare;
mod config;
mod metrics;
mod run;

pub use compare::{compare_backends, compare_outputs, BackendComparison};
pub use config::{barrier_field, Backend, ScenarioConfig, ScenarioId};
pub use metrics::{final_window, psi_channels, psi_rmse, rhythm};
pub use run::{run_scenario, simulate, write_outputs, ManifestEntry, MemberReport, RunOutput, RunReport, Trace};
