//! Planar multi-link swimmer with quadratic drag.

mod dynamics;
mod params;

pub use dynamics::{drag_force, dynamics_step, pd_torque, BodyModel, BodyState, Kinematics};
pub use params::{BodyConfig, DragLaw, DragParams, FluidField, PdGains};

use serde::{Deserialize, Serialize};

/// Summary of a body trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyMetrics {
    pub head_position: [f64; 2],
    pub heading: f64,
    /// Centre-of-mass speed (m/s).
    pub speed: f64,
}

pub fn body_metrics(model: &BodyModel, state: &BodyState) -> BodyMetrics {
    let p = model.linear_momentum(state);
    let mass = model.config().link_mass * model.config().n_links as f64;
    BodyMetrics {
        head_position: state.head_position(),
        heading: state.heading(),
        speed: p[0].hypot(p[1]) / mass,
    }
}
