//! Functions decoded by the spiking populations.

use crate::cpg::{coupling_numerator, CartOscState, DriveMap, PhaseConvention, EPSILON_R};

/// Recurrent function of a 4-d oscillator population over
/// `[x, y, omega / omega_scale, R]`: `x + tau f(x)` on the `(x, y)` plane.
/// The `(omega, R)` dimensions track their inputs with time constant `tau`,
/// so their recurrent contribution is zero.
pub fn oscillator_feedback(v: &[f64], a: f64, omega_scale: f64, tau: f64) -> [f64; 4] {
    let (x, y) = (v[0], v[1]);
    let omega = v[2] * omega_scale;
    let radial = a * (v[3] * v[3] - (x * x + y * y));
    [
        x + tau * (radial * x - omega * y),
        y + tau * (radial * y + omega * x),
        0.0,
        0.0,
    ]
}

/// Velocity contributed to oscillator `i` by source `j`, scaled by `tau`,
/// from a coupling population over `[x_i, y_i, x_j, y_j]`.
///
/// This is the coupled-frequency summand `c = (w / r_i) n_ij` applied as a
/// rotation, `tau (-c y_i, c x_i)`.
pub fn coupling_term(v: &[f64], weight: f64, phase_bias: f64, convention: PhaseConvention, tau: f64) -> [f64; 2] {
    let (xi, yi) = (v[0], v[1]);
    let numerator = coupling_numerator(CartOscState::new(xi, yi), CartOscState::new(v[2], v[3]), phase_bias, convention);
    let r_i = (xi * xi + yi * yi).sqrt().max(EPSILON_R);
    let k = weight / r_i * numerator;
    [-tau * k * yi, tau * k * xi]
}

/// Targets `[omega / omega_scale, R]` encoded by a drive population.
pub fn drive_target(d: f64, map: &DriveMap, omega_scale: f64) -> [f64; 2] {
    let (omega, amplitude) = map.saturate(d);
    [omega / omega_scale, amplitude]
}
