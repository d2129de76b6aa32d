//! Spiking central pattern generator for a swimming lamprey-like robot.
//!
//! The crate is organised bottom-up:
//!
//! * [`cpg`]: the exact coupled-oscillator model (phase and Cartesian forms),
//!   drive saturation, motor output and a fixed-step integrator.
//! * [`nef`]: a small Neural Engineering Framework engine: LIF tuning curves,
//!   regularised least-squares decoders, exponential synapses and a spiking
//!   network simulator.
//! * [`scpg`]: the oscillator chain compiled into spiking populations.
//! * [`body`]: a planar multi-link swimmer with PD-controlled joints and
//!   anisotropic quadratic drag.
//! * [`pilot`]: drive schedules and heading-error steering.
//! * [`scenario`]: closed-loop runs, CSV/JSON output and backend comparison.

pub mod analysis;
pub mod body;
pub mod cpg;
pub mod error;
pub mod nef;
pub mod pilot;
pub mod scenario;
pub mod scpg;

pub use error::{Error, Result};
