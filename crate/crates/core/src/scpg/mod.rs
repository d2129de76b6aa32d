//! The oscillator chain compiled into spiking LIF populations.
//!
//! Each oscillator is a 4-d population over `[x, y, omega / omega_scale, R]`
//! whose recurrent decoders implement the Cartesian dynamics. Every directed
//! coupling gets its own 4-d population over `[x_i, y_i, x_j, y_j]` that
//! decodes the coupling velocity into the `(x, y)` input of oscillator `i`.
//! Drive populations turn the left/right drive into `(omega, R)` targets.

mod config;
mod domain;
mod net;
mod targets;

pub use domain::{coupling_points, oscillator_points, EvalDomain};
pub use config::{ProbeKind, ScpgConfig, MIN_RECOMMENDED_NEURONS};
pub use net::{
    build_scpg, CouplingPopulationHandle, DriveHandle, OscPopulationHandle, PerturbationSpec, ProbeData,
    ScpgNetwork,
};
pub use targets::{coupling_term, drive_target, oscillator_feedback};
