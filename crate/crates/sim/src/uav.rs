//! Point-mass UAV with acceleration limits, tracking planner setpoints.

use nalgebra::Vector3;
use usvwave_core::planner::UavState;

use crate::config::UavConfig;

/// Position, velocity and feedforward acceleration to track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavCommand {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
}

impl UavCommand {
    pub fn hold(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavPlant {
    kp: f64,
    kd: f64,
    max_accel: f64,
}

impl UavPlant {
    pub fn new(cfg: &UavConfig) -> Self {
        Self {
            kp: cfg.kp,
            kd: cfg.kd,
            max_accel: cfg.max_accel,
        }
    }

    /// PD plus feedforward, clamped per axis, held constant over `dt`.
    pub fn acceleration(&self, s: &UavState, cmd: &UavCommand) -> Vector3<f64> {
        let a = cmd.acceleration + (cmd.position - s.position) * self.kp + (cmd.velocity - s.velocity) * self.kd;
        a.map(|x| x.clamp(-self.max_accel, self.max_accel))
    }

    pub fn step(&self, s: &UavState, cmd: &UavCommand, dt: f64) -> UavState {
        let a = self.acceleration(s, cmd);
        UavState {
            position: s.position + s.velocity * dt + a * (0.5 * dt * dt),
            velocity: s.velocity + a * dt,
        }
    }
}
