//! Non-spiking coupled-oscillator CPG in phase and Cartesian form.
//!
//! This is the exact model the spiking network approximates, and the oracle
//! it is checked against.

mod drive;
mod integrate;
mod oscillator;
mod reference;
mod topology;

pub use drive::{saturate_drive, DriveMap, DriveSignal};
pub use integrate::{integrate_step, integrate_step_forced, ode_step, CpgState, Method};
pub use oscillator::{
    cart_derivatives, cart_derivatives_clamped, coupled_frequency, motor_output, motor_output_with,
    phase_derivatives, phase_model_output, phase_motor_output, CartOscState, MotorReadout,
    OscillatorParams, PhaseDerivative, PhaseOscState, EPSILON_R,
};
pub(crate) use oscillator::coupling_numerator;
pub use reference::{CpgParams, ReferenceCpg};
pub use topology::{build_topology, ChainTopology, Coupling, PhaseConvention};
