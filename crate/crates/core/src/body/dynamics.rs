use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::params::{BodyConfig, DragLaw, DragParams, FluidField, PdGains};
use crate::error::{Error, Result};

/// Generalised coordinates and velocities of the body.
///
/// `q = [x, y, heading, joint_0, ..]` where `(x, y)` is the centre of the
/// head link and `heading` its yaw (counter-clockwise, unwrapped). Link `i`
/// has orientation `heading + sum_{k<i} joint_k`; links trail behind the head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
}

impl BodyState {
    pub fn at_rest(config: &BodyConfig) -> Self {
        Self {
            q: vec![0.0; config.n_coordinates()],
            qd: vec![0.0; config.n_coordinates()],
        }
    }

    pub fn head_position(&self) -> [f64; 2] {
        [self.q[0], self.q[1]]
    }

    pub fn heading(&self) -> f64 {
        self.q[2]
    }

    pub fn joint_angles(&self) -> &[f64] {
        &self.q[3..]
    }

    pub fn joint_velocities(&self) -> &[f64] {
        &self.qd[3..]
    }

    /// Rigid rotation of the whole state about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut q = self.q.clone();
        let mut qd = self.qd.clone();
        q[0] = c * self.q[0] - s * self.q[1];
        q[1] = s * self.q[0] + c * self.q[1];
        q[2] += angle;
        qd[0] = c * self.qd[0] - s * self.qd[1];
        qd[1] = s * self.qd[0] + c * self.qd[1];
        Self { q, qd }
    }

    /// Reflection about the x axis.
    pub fn mirrored(&self) -> Self {
        let mut q: Vec<f64> = self.q.iter().map(|v| -v).collect();
        let mut qd: Vec<f64> = self.qd.iter().map(|v| -v).collect();
        q[0] = self.q[0];
        qd[0] = self.qd[0];
        Self { q, qd }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qd).all(|v| v.is_finite())
    }
}

/// `clamp(kp (target - angle) - kd ang_vel, +-limit)`.
pub fn pd_torque(psi_target: f64, angle: f64, ang_vel: f64, gains: &PdGains) -> f64 {
    (gains.kp * (psi_target - angle) - gains.kd * ang_vel).clamp(-gains.torque_limit, gains.torque_limit)
}

/// Drag on a link moving at `v_rel` relative to the water, with the link axis
/// at angle `link_heading`. Each axis component opposes its velocity.
pub fn drag_force(v_rel: [f64; 2], link_heading: f64, params: &DragParams) -> [f64; 2] {
    let (s, c) = link_heading.sin_cos();
    let v_par = v_rel[0] * c + v_rel[1] * s;
    let v_perp = -v_rel[0] * s + v_rel[1] * c;
    let (s_par, s_perp) = match params.law {
        DragLaw::Componentwise => (v_par.abs(), v_perp.abs()),
        DragLaw::Norm => (v_par.hypot(v_perp), v_par.hypot(v_perp)),
    };
    let f_par = -params.lambda_parallel() * v_par * s_par;
    let f_perp = -params.lambda_perpendicular() * v_perp * s_perp;
    [f_par * c - f_perp * s, f_par * s + f_perp * c]
}

// damping of the limit penalty per unit stiffness (s)
const LIMIT_DAMPING_RATIO: f64 = 0.01;

/// Link-level kinematics at one state.
#[derive(Clone, Debug)]
pub struct Kinematics {
    /// Link orientations.
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub centers: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    /// `jac[i]` maps `qd` to the velocity of link centre `i`, two rows of
    /// length `n_coordinates`.
    pub jac: Vec<[Vec<f64>; 2]>,
    /// Velocity-product part of each centre acceleration.
    pub bias: Vec<[f64; 2]>,
}

/// Reduced-coordinate dynamics of the swimmer.
#[derive(Clone, Debug)]
pub struct BodyModel {
    config: BodyConfig,
}

impl BodyModel {
    pub fn new(config: BodyConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &BodyConfig {
        &self.config
    }

    // s[i][l]: weight of link l's normal in the offset of centre i from the head
    fn offset_weight(&self, i: usize, l: usize) -> f64 {
        let h = 0.5 * self.config.link_length;
        if i == 0 || l > i {
            0.0
        } else if l == 0 || l == i {
            h
        } else {
            2.0 * h
        }
    }

    pub fn kinematics(&self, state: &BodyState) -> Kinematics {
        let n = self.config.n_links;
        let nq = self.config.n_coordinates();
        let h = 0.5 * self.config.link_length;
        let mut theta = Vec::with_capacity(n);
        let mut omega = Vec::with_capacity(n);
        let (mut th, mut om) = (state.q[2], state.qd[2]);
        for i in 0..n {
            if i > 0 {
                th += state.q[2 + i];
                om += state.qd[2 + i];
            }
            theta.push(th);
            omega.push(om);
        }
        let dirs: Vec<[f64; 2]> = theta.iter().map(|t| [t.cos(), t.sin()]).collect();

        let mut centers = Vec::with_capacity(n);
        let mut c = [state.q[0], state.q[1]];
        centers.push(c);
        for i in 1..n {
            c[0] -= h * (dirs[i - 1][0] + dirs[i][0]);
            c[1] -= h * (dirs[i - 1][1] + dirs[i][1]);
            centers.push(c);
        }

        let mut jac = Vec::with_capacity(n);
        let mut velocities = Vec::with_capacity(n);
        let mut bias = Vec::with_capacity(n);
        for i in 0..n {
            let mut jx = vec![0.0; nq];
            let mut jy = vec![0.0; nq];
            jx[0] = 1.0;
            jy[1] = 1.0;
            let mut b = [0.0; 2];
            for l in 0..=i {
                let s = self.offset_weight(i, l);
                if s == 0.0 {
                    continue;
                }
                // d(theta_l)/dq is 1 on heading and joints 0..l
                let (ux, uy) = (dirs[l][0], dirs[l][1]);
                for col in 2..(3 + l) {
                    jx[col] += s * uy;
                    jy[col] -= s * ux;
                }
                b[0] += s * omega[l] * omega[l] * ux;
                b[1] += s * omega[l] * omega[l] * uy;
            }
            let v = [
                jx.iter().zip(&state.qd).map(|(a, b)| a * b).sum(),
                jy.iter().zip(&state.qd).map(|(a, b)| a * b).sum(),
            ];
            velocities.push(v);
            jac.push([jx, jy]);
            bias.push(b);
        }
        Kinematics {
            theta,
            omega,
            centers,
            velocities,
            jac,
            bias,
        }
    }

    pub fn mass_matrix(&self, kin: &Kinematics) -> Mat<f64> {
        let nq = self.config.n_coordinates();
        let m = self.config.link_mass;
        let inertia = self.config.inertia();
        let mut mm = Mat::<f64>::zeros(nq, nq);
        for (i, [jx, jy]) in kin.jac.iter().enumerate() {
            for r in 0..nq {
                for c in 0..nq {
                    mm[(r, c)] += m * (jx[r] * jx[c] + jy[r] * jy[c]);
                }
            }
            // link i turns with the heading and joints 0..i
            for r in 2..(3 + i) {
                for c in 2..(3 + i) {
                    mm[(r, c)] += inertia;
                }
            }
        }
        mm
    }

    /// Drag on every link centre.
    pub fn drag_forces(&self, kin: &Kinematics, fluid: &FluidField) -> Vec<[f64; 2]> {
        kin.centers
            .iter()
            .zip(&kin.velocities)
            .zip(&kin.theta)
            .map(|((p, v), th)| {
                let u = fluid.velocity_at(*p);
                drag_force([v[0] - u[0], v[1] - u[1]], *th, &self.config.drag)
            })
            .collect()
    }

    /// Penalty torques holding the joints inside their limits.
    pub fn limit_torques(&self, state: &BodyState) -> Vec<f64> {
        let lim = self.config.joint_limit;
        let k = self.config.limit_stiffness;
        state
            .joint_angles()
            .iter()
            .zip(state.joint_velocities())
            .map(|(&a, &w)| {
                let over = if a > lim { a - lim } else if a < -lim { a + lim } else { 0.0 };
                if over == 0.0 {
                    0.0
                } else {
                    -k * over - LIMIT_DAMPING_RATIO * k * w
                }
            })
            .collect()
    }

    fn check_shape(&self, state: &BodyState, n_joint_inputs: usize) -> Result<()> {
        let nq = self.config.n_coordinates();
        if n_joint_inputs != self.config.n_joints() || state.q.len() != nq || state.qd.len() != nq {
            return Err(Error::Shape(format!(
                "body with {} joints got {} joint inputs and a state of length {}",
                self.config.n_joints(),
                n_joint_inputs,
                state.q.len()
            )));
        }
        Ok(())
    }

    /// Solves `(M + diag) qdd = rhs + torques`, where `diag` adds to the
    /// joint entries of the mass matrix.
    fn solve(&self, state: &BodyState, kin: &Kinematics, fluid: &FluidField, torques: &[f64], diag: &[f64]) -> Result<Vec<f64>> {
        let nq = self.config.n_coordinates();
        let forces = self.drag_forces(kin, fluid);
        let m = self.config.link_mass;
        let mut rhs = Mat::<f64>::zeros(nq, 1);
        for ((jac, f), b) in kin.jac.iter().zip(&forces).zip(&kin.bias) {
            let g = [f[0] - m * b[0], f[1] - m * b[1]];
            for r in 0..nq {
                rhs[(r, 0)] += jac[0][r] * g[0] + jac[1][r] * g[1];
            }
        }
        let limits = self.limit_torques(state);
        for (k, (t, l)) in torques.iter().zip(&limits).enumerate() {
            rhs[(3 + k, 0)] += t + l;
        }
        let mut mm = self.mass_matrix(kin);
        for (k, d) in diag.iter().enumerate() {
            mm[(3 + k, 3 + k)] += d;
        }
        let llt = mm
            .llt(Side::Lower)
            .map_err(|e| Error::divergence("body", f64::NAN, format!("singular mass matrix: {e:?}")))?;
        let qdd = llt.solve(&rhs);
        Ok((0..nq).map(|r| qdd[(r, 0)]).collect())
    }

    /// Generalised accelerations for joint torques `torques`.
    pub fn accelerations(&self, state: &BodyState, torques: &[f64], fluid: &FluidField) -> Result<(Vec<f64>, Kinematics)> {
        self.check_shape(state, torques.len())?;
        let kin = self.kinematics(state);
        let qdd = self.solve(state, &kin, fluid, torques, &vec![0.0; torques.len()])?;
        Ok((qdd, kin))
    }

    fn advance(state: &BodyState, qdd: &[f64], dt: f64) -> Result<BodyState> {
        let qd: Vec<f64> = state.qd.iter().zip(qdd).map(|(v, a)| v + dt * a).collect();
        let q: Vec<f64> = state.q.iter().zip(&qd).map(|(x, v)| x + dt * v).collect();
        let next = BodyState { q, qd };
        if !next.is_finite() {
            return Err(Error::divergence("body", f64::NAN, "non-finite body state"));
        }
        Ok(next)
    }

    /// Semi-implicit Euler step under given joint torques.
    pub fn step(&self, state: &BodyState, torques: &[f64], fluid: &FluidField, dt: f64) -> Result<BodyState> {
        if !(dt > 0.0) {
            return Err(Error::config(format!("body time step must be > 0, got {dt}")));
        }
        let (qdd, _) = self.accelerations(state, torques, fluid)?;
        Self::advance(state, &qdd, dt)
    }

    /// Step with the joint PD loop closed over the end-of-step joint state.
    ///
    /// An unsaturated joint receives `kp (target - q') - kd qd'` evaluated at
    /// the updated position and velocity, which stays stable for gains far
    /// beyond what an explicit PD torque tolerates at 1 ms on light links.
    /// Saturated joints get the clamped explicit torque. Returns the new
    /// state and the torques actually applied.
    pub fn step_pd(&self, state: &BodyState, setpoints: &[f64], fluid: &FluidField, dt: f64) -> Result<(BodyState, Vec<f64>)> {
        if !(dt > 0.0) {
            return Err(Error::config(format!("body time step must be > 0, got {dt}")));
        }
        self.check_shape(state, setpoints.len())?;
        let pd = self.config.pd;
        let sign = self.config.setpoint_sign;
        let c = pd.kd * dt + pd.kp * dt * dt;
        let kin = self.kinematics(state);
        let base: Vec<f64> = setpoints
            .iter()
            .zip(state.joint_angles())
            .zip(state.joint_velocities())
            .map(|((&psi, &a), &w)| pd.kp * (sign * psi - a - dt * w) - pd.kd * w)
            .collect();
        let mut saturated: Vec<bool> = base.iter().map(|t| t.abs() > pd.torque_limit).collect();
        // a joint leaving the linear range is re-solved as saturated
        for _ in 0..=setpoints.len() {
            let torques: Vec<f64> = base
                .iter()
                .zip(&saturated)
                .map(|(t, &sat)| if sat { t.clamp(-pd.torque_limit, pd.torque_limit) } else { *t })
                .collect();
            let diag: Vec<f64> = saturated.iter().map(|&sat| if sat { 0.0 } else { c }).collect();
            let qdd = self.solve(state, &kin, fluid, &torques, &diag)?;
            let applied: Vec<f64> = torques
                .iter()
                .zip(&diag)
                .zip(&qdd[3..])
                .map(|((t, d), a)| t - d * a)
                .collect();
            let mut changed = false;
            for (sat, t) in saturated.iter_mut().zip(&applied) {
                if !*sat && t.abs() > pd.torque_limit * (1.0 + 1e-9) {
                    *sat = true;
                    changed = true;
                }
            }
            if !changed {
                return Ok((Self::advance(state, &qdd, dt)?, applied));
            }
        }
        unreachable!("each pass saturates at least one more joint")
    }

    /// Explicit PD torques toward joint setpoints, with the configured sign.
    pub fn pd_torques(&self, state: &BodyState, setpoints: &[f64]) -> Vec<f64> {
        setpoints
            .iter()
            .zip(state.joint_angles())
            .zip(state.joint_velocities())
            .map(|((&psi, &a), &w)| pd_torque(self.config.setpoint_sign * psi, a, w, &self.config.pd))
            .collect()
    }

    pub fn kinetic_energy(&self, state: &BodyState) -> f64 {
        let kin = self.kinematics(state);
        let m = self.config.link_mass;
        let inertia = self.config.inertia();
        kin.velocities
            .iter()
            .zip(&kin.omega)
            .map(|(v, w)| 0.5 * m * (v[0] * v[0] + v[1] * v[1]) + 0.5 * inertia * w * w)
            .sum()
    }

    pub fn linear_momentum(&self, state: &BodyState) -> [f64; 2] {
        let kin = self.kinematics(state);
        let m = self.config.link_mass;
        kin.velocities
            .iter()
            .fold([0.0; 2], |acc, v| [acc[0] + m * v[0], acc[1] + m * v[1]])
    }

    pub fn center_of_mass(&self, state: &BodyState) -> [f64; 2] {
        let kin = self.kinematics(state);
        let n = kin.centers.len() as f64;
        let s = kin.centers.iter().fold([0.0; 2], |a, c| [a[0] + c[0], a[1] + c[1]]);
        [s[0] / n, s[1] / n]
    }
}

/// One step of the body under joint torques.
pub fn dynamics_step(
    model: &BodyModel,
    state: &BodyState,
    torques: &[f64],
    fluid: &FluidField,
    dt: f64,
) -> Result<BodyState> {
    model.step(state, torques, fluid, dt)
}
