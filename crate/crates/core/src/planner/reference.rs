//! Reference trajectories over the MPC window, built from the predicted deck.

use nalgebra::Vector3;

use super::{FollowConfig, LandingConfig, Phase};
use crate::error::Result;
use crate::prediction::PredictionHorizon;

/// Reference samples `k = 1..=N_m` at `start_stamp + k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub start_stamp: f64,
    pub dt: f64,
    pub position: Vec<Vector3<f64>>,
    pub velocity: Vec<Vector3<f64>>,
}

impl Reference {
    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    pub fn stamp(&self, k: usize) -> f64 {
        self.start_stamp + (k + 1) as f64 * self.dt
    }

    /// Constant reference at `p`, mostly for tests.
    pub fn constant(start_stamp: f64, dt: f64, steps: usize, p: Vector3<f64>) -> Self {
        Self {
            start_stamp,
            dt,
            position: vec![p; steps],
            velocity: vec![Vector3::zeros(); steps],
        }
    }
}

/// Commanded height above the deck `elapsed` seconds after it was `start`,
/// with its rate of change.
pub fn height_at(
    phase: Phase,
    start: f64,
    elapsed: f64,
    paused: bool,
    follow: &FollowConfig,
    landing: &LandingConfig,
) -> (f64, f64) {
    let ramp = |rate: f64, floor: f64| {
        let h = start - rate * elapsed;
        if h > floor {
            (h, -rate)
        } else {
            (floor.min(start), 0.0)
        }
    };
    match phase {
        Phase::Follow | Phase::Align | Phase::Aborted => {
            let target = follow.hover_height;
            let v = landing.descent_rate;
            if start < target {
                let h = start + v * elapsed;
                if h < target {
                    (h, v)
                } else {
                    (target, 0.0)
                }
            } else {
                ramp(v, target)
            }
        }
        Phase::Descend => ramp(landing.descent_rate, 0.0),
        Phase::Touchdown if paused => (start, 0.0),
        Phase::Touchdown => ramp(landing.touchdown_rate, landing.touchdown_floor),
    }
}

/// Deck position predicted at each MPC step plus the commanded height offset.
/// Velocities are the predicted deck velocity plus the height rate.
#[allow(clippy::too_many_arguments)]
pub fn reference_from_horizon(
    horizon: &PredictionHorizon<f64>,
    t0: f64,
    phase: Phase,
    start_height: f64,
    paused: bool,
    follow: &FollowConfig,
    landing: &LandingConfig,
) -> Result<Reference> {
    horizon.index_at(t0)?;
    let mut position = Vec::with_capacity(follow.steps);
    let mut velocity = Vec::with_capacity(follow.steps);
    for k in 1..=follow.steps {
        let elapsed = k as f64 * follow.dt;
        let idx = horizon.index_at(t0 + elapsed)?;
        let deck = horizon.world_pose(idx).position;
        let deck_v = horizon.world_velocity(idx);
        let (h, rate) = height_at(phase, start_height, elapsed, paused, follow, landing);
        position.push(deck + Vector3::new(0.0, 0.0, h));
        velocity.push(deck_v + Vector3::new(0.0, 0.0, rate));
    }
    Ok(Reference {
        start_stamp: t0,
        dt: follow.dt,
        position,
        velocity,
    })
}
