use serde::{Deserialize, Serialize};

use super::oscillator::{
    cart_derivatives_clamped, phase_derivatives, CartOscState, OscillatorParams, PhaseOscState,
};
use super::topology::ChainTopology;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

/// State of the whole chain in either model form.
#[derive(Clone, Debug, PartialEq)]
pub enum CpgState {
    Phase(Vec<PhaseOscState>),
    Cartesian(Vec<CartOscState>),
}

impl CpgState {
    fn flatten(&self) -> Vec<f64> {
        match self {
            CpgState::Phase(s) => s.iter().flat_map(|o| [o.theta, o.r, o.r_dot]).collect(),
            CpgState::Cartesian(s) => s.iter().flat_map(|o| [o.x, o.y]).collect(),
        }
    }

    fn rebuild(&self, flat: &[f64]) -> CpgState {
        match self {
            CpgState::Phase(_) => CpgState::Phase(
                flat.chunks_exact(3)
                    .map(|c| PhaseOscState {
                        theta: c[0],
                        r: c[1],
                        r_dot: c[2],
                    })
                    .collect(),
            ),
            CpgState::Cartesian(_) => CpgState::Cartesian(
                flat.chunks_exact(2).map(|c| CartOscState::new(c[0], c[1])).collect(),
            ),
        }
    }
}

/// One explicit step of `y' = f(y)`.
pub fn ode_step<F>(y: &[f64], dt: f64, method: Method, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        a.iter().zip(k).map(|(a, k)| a + h * k).collect()
    };
    match method {
        Method::Euler => {
            let k1 = f(y)?;
            Ok(axpy(y, &k1, dt))
        }
        Method::Rk4 => {
            let k1 = f(y)?;
            let k2 = f(&axpy(y, &k1, dt / 2.0))?;
            let k3 = f(&axpy(y, &k2, dt / 2.0))?;
            let k4 = f(&axpy(y, &k3, dt))?;
            Ok(y.iter()
                .enumerate()
                .map(|(i, v)| v + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        }
    }
}

/// Advances `state` by one fixed step. `forcing` adds a constant velocity
/// (dx/dt, dy/dt) per oscillator to the Cartesian form and is ignored by
/// the phase form.
pub fn integrate_step_forced(
    state: &CpgState,
    params: &[OscillatorParams],
    topo: &ChainTopology,
    dt: f64,
    method: Method,
    forcing: Option<&[(f64, f64)]>,
) -> Result<CpgState> {
    if !(dt >= 0.0) {
        return Err(Error::config(format!("step size must be non-negative, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let flat = state.flatten();
    let next = match state {
        CpgState::Phase(_) => ode_step(&flat, dt, method, |y| {
            let s = match state.rebuild(y) {
                CpgState::Phase(s) => s,
                CpgState::Cartesian(_) => unreachable!(),
            };
            Ok(phase_derivatives(&s, params, topo)?
                .into_iter()
                .flat_map(|d| [d.theta_dot, d.r_dot, d.r_ddot])
                .collect())
        })?,
        CpgState::Cartesian(_) => ode_step(&flat, dt, method, |y| {
            let s: Vec<CartOscState> =
                y.chunks_exact(2).map(|c| CartOscState::new(c[0], c[1])).collect();
            let mut d = cart_derivatives_clamped(&s, params, topo)?;
            if let Some(f) = forcing {
                for (d, f) in d.iter_mut().zip(f) {
                    d.0 += f.0;
                    d.1 += f.1;
                }
            }
            Ok(d.into_iter().flat_map(|(a, b)| [a, b]).collect())
        })?,
    };
    if let Some(bad) = next.iter().position(|v| !v.is_finite()) {
        let per = if matches!(state, CpgState::Phase(_)) { 3 } else { 2 };
        return Err(Error::divergence(
            "cpg reference",
            f64::NAN,
            format!("non-finite state on oscillator {}", bad / per),
        ));
    }
    Ok(state.rebuild(&next))
}

pub fn integrate_step(
    state: &CpgState,
    params: &[OscillatorParams],
    topo: &ChainTopology,
    dt: f64,
    method: Method,
) -> Result<CpgState> {
    integrate_step_forced(state, params, topo, dt, method, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpg::topology::PhaseConvention;

    fn lone(a: f64, omega: f64, amplitude: f64) -> (Vec<OscillatorParams>, ChainTopology) {
        (
            vec![OscillatorParams { a, omega, amplitude }],
            ChainTopology {
                n_segments: 0,
                couplings: vec![],
                output_gain: 1.0,
                convention: PhaseConvention::SourceMinusTarget,
            },
        )
    }

    /// Closed form of r' = a (R^2 - r^2) r:
    /// r(t)^2 = R^2 / (1 + (R^2 / r0^2 - 1) exp(-2 a R^2 t)).
    fn radial_closed_form(a: f64, big_r: f64, r0: f64, t: f64) -> f64 {
        let r2 = big_r * big_r / (1.0 + (big_r * big_r / (r0 * r0) - 1.0) * (-2.0 * a * big_r * big_r * t).exp());
        r2.sqrt()
    }

    fn run(state: CpgState, params: &[OscillatorParams], topo: &ChainTopology, dt: f64, steps: usize, m: Method) -> CpgState {
        (0..steps).fold(state, |s, _| integrate_step(&s, params, topo, dt, m).unwrap())
    }

    #[test]
    fn zero_step_is_identity() {
        let (p, topo) = lone(10.0, 3.0, 1.0);
        let s = CpgState::Cartesian(vec![CartOscState::new(0.3, -0.2)]);
        assert_eq!(integrate_step(&s, &p, &topo, 0.0, Method::Rk4).unwrap(), s);
    }

    #[test]
    fn negative_step_rejected() {
        let (p, topo) = lone(10.0, 3.0, 1.0);
        let s = CpgState::Cartesian(vec![CartOscState::new(0.3, -0.2)]);
        assert!(integrate_step(&s, &p, &topo, -1e-3, Method::Rk4).is_err());
    }

    #[test]
    fn rk4_follows_closed_form_radius() {
        let (a, big_r, r0) = (10.0, 0.5, 0.05);
        let (p, topo) = lone(a, 2.0 * std::f64::consts::PI, big_r);
        let mut s = CpgState::Cartesian(vec![CartOscState::new(r0, 0.0)]);
        for k in 1..=10_000 {
            s = integrate_step(&s, &p, &topo, 1e-3, Method::Rk4).unwrap();
            if k % 500 == 0 {
                let CpgState::Cartesian(c) = &s else { unreachable!() };
                let expect = radial_closed_form(a, big_r, r0, k as f64 * 1e-3);
                assert!((c[0].radius() - expect).abs() < 1e-6, "t = {}", k as f64 * 1e-3);
            }
        }
        let CpgState::Cartesian(c) = &s else { unreachable!() };
        assert!((c[0].radius() - big_r).abs() < 1e-6);
    }

    #[test]
    fn euler_and_rk4_agree_in_phase() {
        let (p, topo) = lone(10.0, 2.0 * std::f64::consts::PI, 1.0);
        let s0 = CpgState::Cartesian(vec![CartOscState::new(1.0, 0.0)]);
        let a = run(s0.clone(), &p, &topo, 1e-3, 10_000, Method::Rk4);
        let b = run(s0, &p, &topo, 1e-3, 10_000, Method::Euler);
        let (CpgState::Cartesian(a), CpgState::Cartesian(b)) = (a, b) else { unreachable!() };
        let d = (a[0].phase() - b[0].phase() + std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert!(d.abs() < 0.05, "phase difference {d}");
    }

    #[test]
    fn divergence_is_reported() {
        let (p, topo) = lone(1e300, 1.0, 1e300);
        let s = CpgState::Cartesian(vec![CartOscState::new(1e300, 1e300)]);
        assert!(matches!(
            integrate_step(&s, &p, &topo, 1e-3, Method::Euler),
            Err(Error::Divergence { .. })
        ));
    }
}
