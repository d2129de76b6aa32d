use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the quadratic drag magnitude is formed from the relative velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DragLaw {
    /// `-lambda_c v_c |v_c|` per link axis. Even with equal coefficients
    /// this favours motion along the axes, so it still propels an
    /// undulating body.
    #[default]
    Componentwise,
    /// `-lambda_c v_c |v|`: truly isotropic when the coefficients match.
    Norm,
}

/// Quadratic drag coefficients, `lambda = 0.5 C S rho` per direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DragParams {
    pub c_parallel: f64,
    pub c_perpendicular: f64,
    /// Reference surfaces per link (m^2).
    pub surface_parallel: f64,
    pub surface_perpendicular: f64,
    /// Fluid density (kg/m^3).
    pub rho: f64,
    pub law: DragLaw,
}

impl Default for DragParams {
    fn default() -> Self {
        Self {
            c_parallel: 0.1,
            c_perpendicular: 1.0,
            surface_parallel: 2.7e-3,
            surface_perpendicular: 2.7e-3,
            rho: 1000.0,
            law: DragLaw::Componentwise,
        }
    }
}

impl DragParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c_parallel, self.c_perpendicular, self.surface_parallel, self.surface_perpendicular, self.rho];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::config(format!("drag parameters must be finite and >= 0: {self:?}")));
        }
        if self.c_perpendicular < self.c_parallel {
            log::warn!("perpendicular drag below parallel drag; the body cannot propel itself forward");
        }
        Ok(())
    }

    pub fn lambda_parallel(&self) -> f64 {
        0.5 * self.c_parallel * self.surface_parallel * self.rho
    }

    pub fn lambda_perpendicular(&self) -> f64 {
        0.5 * self.c_perpendicular * self.surface_perpendicular * self.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdGains {
    /// N m / rad
    pub kp: f64,
    /// N m s / rad
    pub kd: f64,
    /// N m
    pub torque_limit: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self {
            kp: 5.0,
            kd: 0.05,
            torque_limit: 5.0,
        }
    }
}

impl PdGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp >= 0.0) || !(self.kd >= 0.0) || !(self.torque_limit > 0.0) {
            return Err(Error::config(format!("PD gains must be >= 0 with a positive limit: {self:?}")));
        }
        Ok(())
    }
}

/// Ambient water velocity `u(p) = current_velocity + gradient p`.
///
/// A spatially uniform current only advects the body: with drag depending on
/// the relative velocity alone, it cannot change the heading. The gradient
/// term gives the shear needed to push the body off course.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidField {
    pub current_velocity: [f64; 2],
    /// Row-major velocity gradient (1/s).
    pub gradient: [[f64; 2]; 2],
}

impl FluidField {
    pub fn uniform(vx: f64, vy: f64) -> Self {
        Self {
            current_velocity: [vx, vy],
            gradient: [[0.0; 2]; 2],
        }
    }

    pub fn velocity_at(&self, p: [f64; 2]) -> [f64; 2] {
        let g = &self.gradient;
        [
            self.current_velocity[0] + g[0][0] * p[0] + g[0][1] * p[1],
            self.current_velocity[1] + g[1][0] * p[0] + g[1][1] * p[1],
        ]
    }

    /// The same field seen in a frame rotated by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = [[c, -s], [s, c]];
        let u = self.current_velocity;
        let mut g = [[0.0; 2]; 2];
        // R G R^T
        for (i, gi) in g.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                *gij = (0..2)
                    .flat_map(|k| (0..2).map(move |l| (k, l)))
                    .map(|(k, l)| r[i][k] * self.gradient[k][l] * r[j][l])
                    .sum();
            }
        }
        Self {
            current_velocity: [c * u[0] - s * u[1], s * u[0] + c * u[1]],
            gradient: g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.current_velocity.iter().chain(self.gradient.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::config("fluid field must be finite"));
        }
        Ok(())
    }
}

/// Planar multi-link body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyConfig {
    pub n_links: usize,
    /// m
    pub link_length: f64,
    /// kg
    pub link_mass: f64,
    /// kg m^2 about the link centre; `None` uses a slender rod.
    pub link_inertia: Option<f64>,
    pub drag: DragParams,
    pub pd: PdGains,
    /// Mechanical joint limit (rad).
    pub joint_limit: f64,
    /// Penalty stiffness beyond the joint limit (N m / rad).
    pub limit_stiffness: f64,
    /// Sign applied to the joint setpoints before the PD loop.
    pub setpoint_sign: f64,
}

impl Default for BodyConfig {
    fn default() -> Self {
        Self {
            n_links: 9,
            link_length: 0.09,
            link_mass: 0.1,
            link_inertia: None,
            drag: DragParams::default(),
            pd: PdGains::default(),
            joint_limit: std::f64::consts::FRAC_PI_2,
            limit_stiffness: 50.0,
            // with +1 a stronger right drive bends the head clockwise
            setpoint_sign: -1.0,
        }
    }
}

impl BodyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_links < 2 {
            return Err(Error::config("the body needs at least two links"));
        }
        if !(self.link_length > 0.0) || !(self.link_mass > 0.0) || self.inertia() <= 0.0 {
            return Err(Error::config("link length, mass and inertia must be positive"));
        }
        if !(self.joint_limit > 0.0) || !(self.limit_stiffness >= 0.0) {
            return Err(Error::config("joint limit and its stiffness must be positive"));
        }
        if self.setpoint_sign.abs() != 1.0 {
            return Err(Error::config("setpoint_sign must be +1 or -1"));
        }
        self.drag.validate()?;
        self.pd.validate()
    }

    pub fn n_joints(&self) -> usize {
        self.n_links - 1
    }

    pub fn inertia(&self) -> f64 {
        self.link_inertia
            .unwrap_or(self.link_mass * self.link_length * self.link_length / 12.0)
    }

    /// Generalised coordinates: head centre `(x, y)`, head yaw, joint angles.
    pub fn n_coordinates(&self) -> usize {
        3 + self.n_joints()
    }
}
