use serde::{Deserialize, Serialize};

use super::topology::{ChainTopology, PhaseConvention};
use crate::error::{Error, Result};

/// Denominator floor for the `1 / r_i` factor of the Cartesian coupling.
pub const EPSILON_R: f64 = 1e-6;

/// Phase/amplitude oscillator state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseOscState {
    pub theta: f64,
    pub r: f64,
    pub r_dot: f64,
}

/// Cartesian oscillator state; the radius is the amplitude.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CartOscState {
    pub x: f64,
    pub y: f64,
}

impl CartOscState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn phase(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl From<PhaseOscState> for CartOscState {
    fn from(s: PhaseOscState) -> Self {
        CartOscState::from_polar(s.r, s.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Amplitude convergence gain (1/s).
    pub a: f64,
    /// Intrinsic angular frequency (rad/s).
    pub omega: f64,
    /// Target amplitude R.
    pub amplitude: f64,
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !(self.amplitude >= 0.0) || !(self.omega >= 0.0) {
            return Err(Error::config(format!("invalid oscillator parameters {self:?}")));
        }
        Ok(())
    }
}

/// Right-hand side of the phase/amplitude model for one oscillator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseDerivative {
    pub theta_dot: f64,
    pub r_dot: f64,
    pub r_ddot: f64,
}

fn check_lengths(n_states: usize, n_params: usize, topo: &ChainTopology) -> Result<()> {
    if n_states != n_params {
        return Err(Error::Shape(format!(
            "{n_states} states but {n_params} parameter sets"
        )));
    }
    for c in &topo.couplings {
        if c.target >= n_states || c.source >= n_states {
            return Err(Error::Topology(format!(
                "coupling {} <- {} out of range for {} oscillators",
                c.target, c.source, n_states
            )));
        }
    }
    Ok(())
}

pub fn phase_derivatives(
    states: &[PhaseOscState],
    params: &[OscillatorParams],
    topo: &ChainTopology,
) -> Result<Vec<PhaseDerivative>> {
    check_lengths(states.len(), params.len(), topo)?;
    let mut out: Vec<PhaseDerivative> = states
        .iter()
        .zip(params)
        .map(|(s, p)| PhaseDerivative {
            theta_dot: p.omega,
            r_dot: s.r_dot,
            r_ddot: p.a * (p.a / 4.0 * (p.amplitude - s.r) - s.r_dot),
        })
        .collect();
    for c in &topo.couplings {
        let (i, j) = (c.target, c.source);
        let diff = match topo.convention {
            PhaseConvention::SourceMinusTarget => states[j].theta - states[i].theta,
            PhaseConvention::TargetMinusSource => states[i].theta - states[j].theta,
        };
        out[i].theta_dot += states[j].r * c.weight * (diff - c.phase_bias).sin();
    }
    Ok(out)
}

/// Coupling numerator for `source -> target`, equal to
/// `r_i r_j sin(theta_j - theta_i - phi)` under the default convention.
pub(crate) fn coupling_numerator(
    target: CartOscState,
    source: CartOscState,
    phase_bias: f64,
    convention: PhaseConvention,
) -> f64 {
    // r_i r_j sin(theta_j - theta_i) and r_i r_j cos(theta_j - theta_i)
    let cross = target.x * source.y - source.x * target.y;
    let dot = target.x * source.x + target.y * source.y;
    let (s, c) = phase_bias.sin_cos();
    match convention {
        PhaseConvention::SourceMinusTarget => cross * c - dot * s,
        PhaseConvention::TargetMinusSource => -cross * c - dot * s,
    }
}

/// Coupled frequency of oscillator `i`, with the radius floored at `epsilon`.
pub fn coupled_frequency(
    i: usize,
    states: &[CartOscState],
    params: &[OscillatorParams],
    topo: &ChainTopology,
    epsilon: f64,
) -> f64 {
    let r_i = states[i].radius().max(epsilon);
    let mut omega = params[i].omega;
    for c in topo.incoming(i) {
        omega += c.weight / r_i
            * coupling_numerator(states[i], states[c.source], c.phase_bias, topo.convention);
    }
    omega
}

fn cart_rhs(
    states: &[CartOscState],
    params: &[OscillatorParams],
    topo: &ChainTopology,
    strict: bool,
) -> Result<Vec<(f64, f64)>> {
    check_lengths(states.len(), params.len(), topo)?;
    states
        .iter()
        .zip(params)
        .enumerate()
        .map(|(i, (s, p))| {
            let r2 = s.x * s.x + s.y * s.y;
            if strict && r2.sqrt() < EPSILON_R && topo.has_incoming(i) {
                return Err(Error::DegenerateState {
                    index: i,
                    radius: r2.sqrt(),
                    epsilon: EPSILON_R,
                });
            }
            let omega_bar = coupled_frequency(i, states, params, topo, EPSILON_R);
            let radial = p.a * (p.amplitude * p.amplitude - r2);
            Ok((radial * s.x - omega_bar * s.y, radial * s.y + omega_bar * s.x))
        })
        .collect()
}

/// Cartesian right-hand side. Fails on a coupled oscillator sitting at the
/// origin, where the coupled frequency is undefined.
pub fn cart_derivatives(
    states: &[CartOscState],
    params: &[OscillatorParams],
    topo: &ChainTopology,
) -> Result<Vec<(f64, f64)>> {
    cart_rhs(states, params, topo, true)
}

/// Cartesian right-hand side with the radius clamped at [`EPSILON_R`].
pub fn cart_derivatives_clamped(
    states: &[CartOscState],
    params: &[OscillatorParams],
    topo: &ChainTopology,
) -> Result<Vec<(f64, f64)>> {
    cart_rhs(states, params, topo, false)
}

/// How an oscillator state is turned into a motor signal before the
/// left/right difference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotorReadout {
    /// The raw x coordinate.
    RawX,
    /// `x + r`, i.e. `r (1 + cos theta)`: the signal is offset by its
    /// amplitude so left/right amplitude differences bias the joint.
    #[default]
    Offset,
}

impl MotorReadout {
    pub fn signal(self, s: CartOscState) -> f64 {
        match self {
            MotorReadout::RawX => s.x,
            MotorReadout::Offset => s.x + s.radius(),
        }
    }
}

/// `psi_k = alpha (x_right,k - x_left,k)` from raw x coordinates.
pub fn motor_output(states: &[CartOscState], topo: &ChainTopology) -> Vec<f64> {
    motor_output_with(states, topo, MotorReadout::RawX)
}

pub fn motor_output_with(
    states: &[CartOscState],
    topo: &ChainTopology,
    readout: MotorReadout,
) -> Vec<f64> {
    (0..topo.n_segments)
        .map(|k| {
            let left = readout.signal(states[ChainTopology::left(k)]);
            let right = readout.signal(states[ChainTopology::right(k)]);
            topo.output_gain * (right - left)
        })
        .collect()
}

/// Output of the phase model, `x = r (1 + cos theta)`.
pub fn phase_model_output(state: &PhaseOscState) -> f64 {
    state.r * (1.0 + state.theta.cos())
}

/// Joint outputs of the phase model.
pub fn phase_motor_output(states: &[PhaseOscState], topo: &ChainTopology) -> Vec<f64> {
    (0..topo.n_segments)
        .map(|k| {
            topo.output_gain
                * (phase_model_output(&states[ChainTopology::right(k)])
                    - phase_model_output(&states[ChainTopology::left(k)]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpg::topology::{build_topology, Coupling};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn single() -> ChainTopology {
        ChainTopology {
            n_segments: 0,
            couplings: vec![],
            output_gain: 0.5,
            convention: PhaseConvention::SourceMinusTarget,
        }
    }

    fn p(omega: f64, amplitude: f64) -> OscillatorParams {
        OscillatorParams {
            a: 10.0,
            omega,
            amplitude,
        }
    }

    #[test]
    fn uncoupled_phase_steady_state() {
        let s = [PhaseOscState {
            theta: 0.3,
            r: 1.0,
            r_dot: 0.0,
        }];
        let d = phase_derivatives(&s, &[p(2.0 * PI, 1.0)], &single()).unwrap();
        assert_eq!(d[0].theta_dot, 2.0 * PI);
        assert_eq!(d[0].r_ddot, 0.0);
    }

    #[test]
    fn coupling_vanishes_at_bias() {
        let phi = 0.7;
        let topo = ChainTopology {
            n_segments: 1,
            couplings: vec![Coupling {
                target: 0,
                source: 1,
                weight: 5.0,
                phase_bias: phi,
            }],
            output_gain: 1.0,
            convention: PhaseConvention::SourceMinusTarget,
        };
        let s = [
            PhaseOscState {
                theta: 1.0,
                r: 1.0,
                r_dot: 0.0,
            },
            PhaseOscState {
                theta: 1.0 + phi,
                r: 1.0,
                r_dot: 0.0,
            },
        ];
        let d = phase_derivatives(&s, &[p(3.0, 1.0), p(3.0, 1.0)], &topo).unwrap();
        assert!((d[0].theta_dot - 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_chain_matches_hand_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let topo = build_topology(2, PI, 7.0, 0.5).unwrap();
        let states: Vec<PhaseOscState> = (0..4)
            .map(|_| PhaseOscState {
                theta: rng.random_range(-PI..PI),
                r: rng.random_range(0.1..1.0),
                r_dot: rng.random_range(-1.0..1.0),
            })
            .collect();
        let params: Vec<OscillatorParams> = (0..4)
            .map(|_| p(rng.random_range(1.0..10.0), rng.random_range(0.2..1.0)))
            .collect();
        let d = phase_derivatives(&states, &params, &topo).unwrap();
        let th = |i: usize| states[i].theta;
        let r = |i: usize| states[i].r;
        let w = 7.0;
        let lag = PI / 2.0;
        // written out edge by edge for the 2-segment double chain
        let expected = [
            params[0].omega + w * r(2) * (th(2) - th(0) + lag).sin() + w * r(1) * (th(1) - th(0) - PI).sin(),
            params[1].omega + w * r(3) * (th(3) - th(1) + lag).sin() + w * r(0) * (th(0) - th(1) - PI).sin(),
            params[2].omega + w * r(0) * (th(0) - th(2) - lag).sin() + w * r(3) * (th(3) - th(2) - PI).sin(),
            params[3].omega + w * r(1) * (th(1) - th(3) - lag).sin() + w * r(2) * (th(2) - th(3) - PI).sin(),
        ];
        for i in 0..4 {
            assert!((d[i].theta_dot - expected[i]).abs() < 1e-12, "osc {i}");
            let p = params[i];
            let rdd = p.a * (p.a / 4.0 * (p.amplitude - r(i)) - states[i].r_dot);
            assert!((d[i].r_ddot - rdd).abs() < 1e-12);
        }
    }

    #[test]
    fn cartesian_on_circle_is_tangential() {
        let s = [CartOscState::from_polar(0.8, 1.1)];
        let d = cart_derivatives(&s, &[p(3.0, 0.8)], &single()).unwrap();
        let radial = d[0].0 * s[0].x + d[0].1 * s[0].y;
        assert!(radial.abs() < 1e-12);
        let speed = d[0].0.hypot(d[0].1);
        assert!((speed - 3.0 * 0.8).abs() < 1e-12);
    }

    #[test]
    fn cartesian_radial_rate() {
        let s = [CartOscState::from_polar(0.5, 0.4)];
        let d = cart_derivatives(&s, &[p(2.0, 1.0)], &single()).unwrap();
        let dr2 = 2.0 * (s[0].x * d[0].0 + s[0].y * d[0].1);
        assert!((dr2 - 3.75).abs() < 1e-12);
    }

    #[test]
    fn cartesian_coupling_matches_phase_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for convention in [PhaseConvention::SourceMinusTarget, PhaseConvention::TargetMinusSource] {
            let topo = build_topology(3, 2.0 * PI, 4.0, 0.5).unwrap().with_convention(convention);
            let phase: Vec<PhaseOscState> = (0..6)
                .map(|_| PhaseOscState {
                    theta: rng.random_range(-PI..PI),
                    r: rng.random_range(0.2..1.0),
                    r_dot: 0.0,
                })
                .collect();
            let cart: Vec<CartOscState> = phase.iter().map(|&s| s.into()).collect();
            let params: Vec<_> = (0..6).map(|_| p(rng.random_range(1.0..5.0), 0.6)).collect();
            let dp = phase_derivatives(&phase, &params, &topo).unwrap();
            for i in 0..6 {
                let omega_bar = coupled_frequency(i, &cart, &params, &topo, EPSILON_R);
                assert!((omega_bar - dp[i].theta_dot).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_state_is_reported() {
        let topo = build_topology(1, 0.0, 1.0, 1.0).unwrap();
        let s = [CartOscState::new(0.0, 0.0), CartOscState::new(0.5, 0.0)];
        let params = [p(1.0, 1.0), p(1.0, 1.0)];
        assert!(matches!(
            cart_derivatives(&s, &params, &topo),
            Err(Error::DegenerateState { index: 0, .. })
        ));
        let d = cart_derivatives_clamped(&s, &params, &topo).unwrap();
        assert!(d[0].0.is_finite() && d[0].1.is_finite());
    }

    #[test]
    fn length_mismatch_is_reported() {
        let topo = build_topology(1, 0.0, 1.0, 1.0).unwrap();
        let s = [CartOscState::new(1.0, 0.0)];
        assert!(cart_derivatives(&s, &[p(1.0, 1.0)], &topo).is_err());
    }

    #[test]
    fn motor_output_symmetric_states_give_zero() {
        let topo = build_topology(4, 2.0 * PI, 1.0, 0.5).unwrap();
        let s: Vec<_> = (0..8).map(|i| CartOscState::from_polar(0.4, (i / 2) as f64)).collect();
        assert!(motor_output(&s, &topo).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn motor_output_antiphase_amplitude() {
        let topo = build_topology(1, 0.0, 1.0, 0.5).unwrap();
        let r = 0.6;
        let peak = (0..1000)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 1000.0;
                let s = [CartOscState::from_polar(r, th + PI), CartOscState::from_polar(r, th)];
                motor_output(&s, &topo)[0].abs()
            })
            .fold(0.0, f64::max);
        assert!((peak - 2.0 * 0.5 * r).abs() < 1e-12);
    }

    #[test]
    fn offset_readout_mean_follows_amplitude_difference() {
        // trapezoidal quadrature of psi over one antiphase cycle
        let topo = build_topology(1, 0.0, 1.0, 0.5).unwrap();
        let (r_left, r_right) = (0.4, 0.6);
        let n = 4000;
        let mean = |readout| {
            (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n as f64;
                    let s = [
                        CartOscState::from_polar(r_left, th + PI),
                        CartOscState::from_polar(r_right, th),
                    ];
                    motor_output_with(&s, &topo, readout)[0]
                })
                .sum::<f64>()
                / n as f64
        };
        let offset = mean(MotorReadout::Offset);
        assert!((offset - 0.5 * (r_right - r_left)).abs() < 1e-9);
        assert!(mean(MotorReadout::RawX).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn motor_output_antisymmetric_under_side_swap(
            xs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
            offset in proptest::bool::ANY,
        ) {
            let topo = build_topology(4, 2.0 * PI, 1.0, 0.7).unwrap();
            let readout = if offset { MotorReadout::Offset } else { MotorReadout::RawX };
            let s: Vec<_> = xs.iter().map(|&(x, y)| CartOscState::new(x, y)).collect();
            let swapped: Vec<_> = (0..8).map(|i| s[i ^ 1]).collect();
            let a = motor_output_with(&s, &topo, readout);
            let b = motor_output_with(&swapped, &topo, readout);
            for (u, v) in a.iter().zip(&b) {
                proptest::prop_assert!((u + v).abs() < 1e-12);
            }
        }
    }
}
