//! Landing phases: Follow -> Align -> Descend -> Touchdown, with aborts back to Follow.

use super::{LandingConfig, Phase, UavState};
use crate::error::{invalid, Result};
use crate::estimation::VesselBelief;
use crate::prediction::PredictionHorizon;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PredicateThresholds {
    /// Bound on both |roll| and |pitch|, rad.
    pub max_tilt: f64,
    /// Horizontal distance between UAV and estimated deck, m.
    pub max_horizontal_error: f64,
    /// Bound on the predicted deck |heave rate| over the horizon, m/s.
    pub max_heave_rate: f64,
}

impl PredicateThresholds {
    pub(crate) fn validate(&self, prefix: &str) -> Result<()> {
        for (name, v) in [
            ("max_tilt", self.max_tilt),
            ("max_horizontal_error", self.max_horizontal_error),
            ("max_heave_rate", self.max_heave_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{prefix}.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Quantities the landing logic looks at, all derived from the belief, the
/// predicted horizon and the UAV's own state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandingObservation {
    pub stamp: f64,
    /// max(|roll|, |pitch|) of the estimated deck.
    pub tilt: f64,
    pub horizontal_error: f64,
    /// UAV height above the estimated deck.
    pub relative_height: f64,
    /// UAV vertical speed minus estimated deck vertical speed.
    pub relative_vertical_speed: f64,
    /// Largest predicted |deck vertical speed| over the whole horizon.
    pub predicted_heave_rate: f64,
    /// Largest predicted upward deck speed within the contact window.
    pub predicted_rise_rate: f64,
}

impl LandingObservation {
    pub fn new(
        belief: &VesselBelief<f64>,
        horizon: &PredictionHorizon<f64>,
        uav: &UavState,
        contact_window: f64,
    ) -> Self {
        let deck = belief.world_pose();
        // yaw-only rotation leaves the vertical component alone
        let deck_vz = belief.mean[8];
        let mut heave: f64 = 0.0;
        let mut rise = f64::NEG_INFINITY;
        for k in 0..=horizon.steps() {
            let vz = horizon.world_velocity(k).z;
            heave = heave.max(vz.abs());
            if k as f64 * horizon.dt <= contact_window + 1e-9 {
                rise = rise.max(vz);
            }
        }
        Self {
            stamp: belief.stamp,
            tilt: deck.roll().abs().max(deck.pitch().abs()),
            horizontal_error: (uav.position.xy() - deck.position.xy()).norm(),
            relative_height: uav.position.z - deck.position.z,
            relative_vertical_speed: uav.velocity.z - deck_vz,
            predicted_heave_rate: heave,
            predicted_rise_rate: rise,
        }
    }
}

/// Tilt, tracking error and predicted heave rate all within `th`.
pub fn safe_landing_predicate(obs: &LandingObservation, th: &PredicateThresholds) -> bool {
    obs.tilt <= th.max_tilt
        && obs.horizontal_error <= th.max_horizontal_error
        && obs.predicted_heave_rate <= th.max_heave_rate
}

/// First estimated contact during Touchdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub stamp: f64,
    pub relative_speed: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandingFsm {
    phase: Phase,
    commanded: bool,
    satisfied_since: Option<f64>,
    contact: Option<Contact>,
}

impl Default for LandingFsm {
    fn default() -> Self {
        Self::new()
    }
}

impl LandingFsm {
    pub fn new() -> Self {
        Self {
            phase: Phase::Follow,
            commanded: false,
            satisfied_since: None,
            contact: None,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn contact(&self) -> Option<Contact> {
        self.contact
    }

    /// Requests a landing; takes effect at the next update while following.
    pub fn command_landing(&mut self) {
        self.commanded = true;
    }

    /// Touchdown holds its height while the deck is predicted to rise too fast.
    pub fn touchdown_paused(&self, obs: &LandingObservation, cfg: &LandingConfig) -> bool {
        self.phase == Phase::Touchdown && obs.predicted_rise_rate > cfg.max_rise_rate
    }

    pub fn update(&mut self, obs: &LandingObservation, cfg: &LandingConfig) -> Phase {
        match self.phase {
            Phase::Follow => {
                if self.commanded {
                    self.commanded = false;
                    self.satisfied_since = None;
                    self.phase = Phase::Align;
                    self.align(obs, cfg);
                }
            }
            Phase::Align => self.align(obs, cfg),
            Phase::Descend => {
                if !safe_landing_predicate(obs, &cfg.abort) {
                    self.phase = Phase::Aborted;
                } else if obs.relative_height <= cfg.touchdown_height {
                    self.phase = Phase::Touchdown;
                    self.touchdown(obs, cfg);
                }
            }
            Phase::Touchdown => self.touchdown(obs, cfg),
            Phase::Aborted => self.phase = Phase::Follow,
        }
        self.phase
    }

    fn align(&mut self, obs: &LandingObservation, cfg: &LandingConfig) {
        if !safe_landing_predicate(obs, &cfg.safe) {
            self.satisfied_since = None;
            return;
        }
        let since = *self.satisfied_since.get_or_insert(obs.stamp);
        if obs.stamp - since >= cfg.dwell - 1e-9 {
            self.phase = Phase::Descend;
            self.satisfied_since = None;
        }
    }

    fn touchdown(&mut self, obs: &LandingObservation, cfg: &LandingConfig) {
        if self.contact.is_none() && obs.relative_height <= cfg.contact_height {
            let speed = obs.relative_vertical_speed.abs();
            self.contact = Some(Contact {
                stamp: obs.stamp,
                relative_speed: speed,
                within_bound: speed <= cfg.contact_speed_bound,
            });
        }
    }
}
