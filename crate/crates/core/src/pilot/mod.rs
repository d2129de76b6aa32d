//! Drive generation: schedules for open-loop runs and heading feedback.

use serde::{Deserialize, Serialize};

use crate::cpg::{DriveMap, DriveSignal};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteeringConfig {
    /// Correction factor (drive units per rad).
    pub cf: f64,
    pub d_left0: f64,
    pub d_right0: f64,
    /// Target heading (rad).
    pub r_z_target: f64,
}

impl Default for SteeringConfig {
    fn default() -> Self {
        Self {
            cf: 2.0,
            d_left0: 3.0,
            d_right0: 3.0,
            r_z_target: 0.0,
        }
    }
}

impl SteeringConfig {
    pub fn validate(&self, map: &DriveMap) -> Result<()> {
        if !(self.cf >= 0.0) || !self.r_z_target.is_finite() {
            return Err(Error::config(format!("steering needs cf >= 0 and a finite target: {self:?}")));
        }
        for d in [self.d_left0, self.d_right0] {
            if !map.in_band(d) {
                return Err(Error::config(format!(
                    "steering baseline drive {d} outside [{}, {}]",
                    map.d_low, map.d_high
                )));
            }
        }
        Ok(())
    }
}

/// Heading feedback: a heading counter-clockwise of the target raises the
/// left drive, clockwise raises the right drive.
pub fn steer(heading: f64, config: &SteeringConfig) -> DriveSignal {
    let e = heading - config.r_z_target;
    let boost = config.cf * e.abs();
    if e > 0.0 {
        DriveSignal::new(config.d_left0 + boost, config.d_right0)
    } else {
        DriveSignal::new(config.d_left0, config.d_right0 + boost)
    }
}

/// [`steer`] with both outputs clamped into the drive band, so a large error
/// cannot push a side past `d_high` and silence it.
pub fn steer_clamped(heading: f64, config: &SteeringConfig, map: &DriveMap) -> DriveSignal {
    let d = steer(heading, config);
    DriveSignal::new(map.clamp(d.d_left), map.clamp(d.d_right))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub t_start: f64,
    pub d_left: f64,
    pub d_right: f64,
}

/// Piecewise-constant drive over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DriveSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl DriveSchedule {
    pub fn constant(drive: DriveSignal) -> Self {
        Self {
            entries: vec![ScheduleEntry {
                t_start: 0.0,
                d_left: drive.d_left,
                d_right: drive.d_right,
            }],
        }
    }

    /// `before` until `t_switch`, then `after`.
    pub fn switch_at(t_switch: f64, before: DriveSignal, after: DriveSignal) -> Self {
        Self {
            entries: vec![
                ScheduleEntry {
                    t_start: 0.0,
                    d_left: before.d_left,
                    d_right: before.d_right,
                },
                ScheduleEntry {
                    t_start: t_switch,
                    d_left: after.d_left,
                    d_right: after.d_right,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::config("drive schedule is empty"));
        }
        for w in self.entries.windows(2) {
            if !(w[1].t_start > w[0].t_start) {
                return Err(Error::config(format!(
                    "drive schedule times must strictly increase: {} then {}",
                    w[0].t_start, w[1].t_start
                )));
            }
        }
        if self
            .entries
            .iter()
            .any(|e| !e.t_start.is_finite() || !e.d_left.is_finite() || !e.d_right.is_finite())
        {
            return Err(Error::config("drive schedule contains non-finite values"));
        }
        Ok(())
    }

    /// Last entry with `t_start <= t`; the first entry before it starts.
    pub fn at(&self, t: f64) -> DriveSignal {
        let idx = self.entries.partition_point(|e| e.t_start <= t).saturating_sub(1);
        let e = &self.entries[idx];
        DriveSignal::new(e.d_left, e.d_right)
    }
}

pub fn scheduled_drive(t: f64, schedule: &DriveSchedule) -> DriveSignal {
    schedule.at(t)
}

/// Two cascaded first-order low-passes on the unwrapped head yaw.
///
/// The head swings by several tenths of a radian every tail beat; the
/// filtered value follows the swimming direction.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadingFilter {
    tau: f64,
    stages: Option<[f64; 2]>,
}

impl HeadingFilter {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::config(format!("heading filter time constant must be >= 0, got {tau}")));
        }
        Ok(Self { tau, stages: None })
    }

    pub fn update(&mut self, heading: f64, dt: f64) -> f64 {
        let k = if self.tau == 0.0 { 1.0 } else { -(-dt / self.tau).exp_m1() };
        let s = self.stages.get_or_insert([heading; 2]);
        s[0] += k * (heading - s[0]);
        s[1] += k * (s[0] - s[1]);
        s[1]
    }

    pub fn value(&self) -> Option<f64> {
        self.stages.map(|s| s[1])
    }
}
