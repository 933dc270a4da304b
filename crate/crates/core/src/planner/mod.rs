//! UAV trajectory generation over the predicted deck motion: a condensed
//! linear MPC on a double integrator plus a phased landing state machine.
//!
//! The planner works in `f64` only; it consumes `f64` beliefs and horizons.

mod landing;
mod mpc;
mod reference;
mod session;

use nalgebra::Vector3;

use crate::error::{invalid, Result};

pub use landing::{safe_landing_predicate, Contact, LandingFsm, LandingObservation, PredicateThresholds};
pub use mpc::{mpc_solve, MpcSolver};
pub use reference::{height_at, reference_from_horizon, Reference};
pub use session::Planner;

/// UAV world position and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl UavState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Result<Self> {
        let s = Self { position, velocity };
        if !s.is_finite() {
            return Err(invalid("UAV state must be finite"));
        }
        Ok(s)
    }

    pub fn hovering(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Phase {
    Follow,
    Align,
    Descend,
    Touchdown,
    Aborted,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Follow => "follow",
            Phase::Align => "align",
            Phase::Descend => "descend",
            Phase::Touchdown => "touchdown",
            Phase::Aborted => "aborted",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Phase {
    type Err = crate::error::CoreError;

    fn from_str(s: &str) -> Result<Self> {
        [Phase::Follow, Phase::Align, Phase::Descend, Phase::Touchdown, Phase::Aborted]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid(format!("unknown planner phase `{s}`")))
    }
}

/// Hover offset, MPC window and limits.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct FollowConfig {
    /// Height above the deck, m.
    pub hover_height: f64,
    /// MPC window length `N_m`.
    pub steps: usize,
    /// MPC step, s. Also the planner period.
    pub dt: f64,
    pub weight_position: f64,
    pub weight_velocity: f64,
    pub weight_acceleration: f64,
    /// Per-axis speed limit, m/s.
    pub v_max: [f64; 3],
    /// Per-axis acceleration limit, m/s^2.
    pub a_max: [f64; 3],
    /// Projected-gradient iterations when the acceleration box is active.
    pub iterations: usize,
}

impl Default for FollowConfig {
    fn default() -> Self {
        Self {
            hover_height: 2.0,
            steps: 100,
            dt: 0.02,
            weight_position: 4.0,
            weight_velocity: 1.0,
            weight_acceleration: 0.2,
            v_max: [2.0, 2.0, 1.5],
            a_max: [3.0, 3.0, 2.5],
            iterations: 30,
        }
    }
}

impl FollowConfig {
    pub fn validate(&self) -> Result<()> {
        positive("hover_height", self.hover_height)?;
        positive("dt", self.dt)?;
        positive("weight_position", self.weight_position)?;
        non_negative("weight_velocity", self.weight_velocity)?;
        positive("weight_acceleration", self.weight_acceleration)?;
        if self.steps == 0 {
            return Err(invalid("steps must be at least 1"));
        }
        for i in 0..3 {
            non_negative("v_max", self.v_max[i])?;
            positive("a_max", self.a_max[i])?;
        }
        Ok(())
    }

    /// Window length in seconds.
    pub fn window(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

/// Descent profile, contact detection and safe-landing thresholds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct LandingConfig {
    /// Descent rate relative to the deck in Descend, m/s.
    pub descent_rate: f64,
    /// Relative height at which Descend hands over to Touchdown, m.
    pub touchdown_height: f64,
    /// Relative descent rate during Touchdown, m/s.
    pub touchdown_rate: f64,
    /// Lowest relative height the Touchdown reference may command, m (below the deck).
    pub touchdown_floor: f64,
    /// Estimated relative height that counts as contact, m.
    pub contact_height: f64,
    /// Maximum relative vertical speed at contact, m/s.
    pub contact_speed_bound: f64,
    /// Look-ahead over which upward deck motion pauses the touchdown, s.
    pub contact_window: f64,
    /// Predicted upward deck speed within the contact window that pauses the touchdown, m/s.
    pub max_rise_rate: f64,
    /// Thresholds that must hold for `dwell` seconds before descending.
    pub safe: PredicateThresholds,
    pub dwell: f64,
    /// Looser thresholds; a violation during Descend aborts.
    pub abort: PredicateThresholds,
}

impl Default for LandingConfig {
    fn default() -> Self {
        Self {
            descent_rate: 0.4,
            touchdown_height: 0.5,
            touchdown_rate: 0.08,
            touchdown_floor: -0.5,
            contact_height: 0.0,
            contact_speed_bound: 0.3,
            contact_window: 0.5,
            max_rise_rate: 0.0,
            safe: PredicateThresholds {
                max_tilt: 0.15,
                max_horizontal_error: 0.3,
                max_heave_rate: 0.4,
            },
            dwell: 1.0,
            abort: PredicateThresholds {
                max_tilt: 0.25,
                max_horizontal_error: 0.6,
                max_heave_rate: 0.8,
            },
        }
    }
}

impl LandingConfig {
    pub fn validate(&self) -> Result<()> {
        positive("descent_rate", self.descent_rate)?;
        positive("touchdown_height", self.touchdown_height)?;
        positive("touchdown_rate", self.touchdown_rate)?;
        positive("contact_speed_bound", self.contact_speed_bound)?;
        positive("contact_window", self.contact_window)?;
        non_negative("max_rise_rate", self.max_rise_rate)?;
        non_negative("dwell", self.dwell)?;
        if !(self.touchdown_floor.is_finite() && self.touchdown_floor <= self.contact_height) {
            return Err(invalid("touchdown_floor must not exceed contact_height"));
        }
        if !(self.contact_height.is_finite() && self.contact_height < self.touchdown_height) {
            return Err(invalid("contact_height must be below touchdown_height"));
        }
        self.safe.validate("safe")?;
        self.abort.validate("abort")
    }
}

/// One planner output sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    pub stamp: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Acceleration applied over the step that ends at this sample.
    pub acceleration: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutput {
    /// Setpoints `k = 1..=N_m`, stamps strictly increasing.
    pub setpoints: Vec<Setpoint>,
    pub phase: Phase,
    /// Objective value of the returned (feasible) plan.
    pub cost: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be non-negative, got {v}")))
    }
}
