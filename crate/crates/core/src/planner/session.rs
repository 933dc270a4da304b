//! Stateful planner: landing phase, commanded height and setpoint continuity.

use super::landing::{Contact, LandingFsm, LandingObservation};
use super::mpc::MpcSolver;
use super::reference::{height_at, reference_from_horizon};
use super::{FollowConfig, LandingConfig, Phase, PlanOutput, Setpoint, UavState};
use crate::error::Result;
use crate::estimation::VesselBelief;
use crate::prediction::PredictionHorizon;

/// Runs once per MPC step. Each plan starts from the first setpoint of the
/// previous one, so the setpoint stream stays within the limits across ticks.
#[derive(Debug, Clone)]
pub struct Planner {
    follow: FollowConfig,
    landing: LandingConfig,
    solver: MpcSolver,
    fsm: LandingFsm,
    chain: Option<Setpoint>,
    height: f64,
}

impl Planner {
    pub fn new(follow: FollowConfig, landing: LandingConfig) -> Result<Self> {
        landing.validate()?;
        let solver = MpcSolver::new(&follow)?;
        Ok(Self {
            height: follow.hover_height,
            follow,
            landing,
            solver,
            fsm: LandingFsm::new(),
            chain: None,
        })
    }

    pub fn follow_config(&self) -> &FollowConfig {
        &self.follow
    }

    pub fn landing_config(&self) -> &LandingConfig {
        &self.landing
    }

    pub fn phase(&self) -> Phase {
        self.fsm.phase()
    }

    pub fn contact(&self) -> Option<Contact> {
        self.fsm.contact()
    }

    /// Commanded height above the deck at the last planned instant.
    pub fn commanded_height(&self) -> f64 {
        self.height
    }

    pub fn command_landing(&mut self) {
        self.fsm.command_landing();
    }

    /// Updates the landing phase and plans from time `t0`.
    pub fn step(
        &mut self,
        t0: f64,
        uav: &UavState,
        belief: &VesselBelief<f64>,
        horizon: &PredictionHorizon<f64>,
    ) -> Result<(PlanOutput, LandingObservation)> {
        let obs = LandingObservation::new(belief, horizon, uav, self.landing.contact_window);
        let phase = self.fsm.update(&obs, &self.landing);
        let paused = self.fsm.touchdown_paused(&obs, &self.landing);
        let reference = reference_from_horizon(horizon, t0, phase, self.height, paused, &self.follow, &self.landing)?;
        let start = match self.chain {
            Some(s) if (s.stamp - t0).abs() <= 1e-6 * self.follow.dt => UavState {
                position: s.position,
                velocity: s.velocity,
            },
            _ => *uav,
        };
        let plan = self.solver.solve(&start, &reference, phase)?;
        self.chain = plan.setpoints.first().copied();
        self.height = height_at(phase, self.height, self.follow.dt, paused, &self.follow, &self.landing).0;
        Ok((plan, obs))
    }
}
