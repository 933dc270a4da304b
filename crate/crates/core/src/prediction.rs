//! N-step rollout of the belief through the discrete model.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::discrete::DiscreteModel;
use crate::error::{invalid, CoreError, Result};
use crate::estimation::{predict_step, ProcessNoise, VesselBelief};
use crate::frames::{to_world, yaw_matrix, EulerPose};
use crate::real::{lit, to_f64, Real};

/// Predicted states `x(k_p)` for `k_p = 0..=N_p`, with covariances when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionHorizon<T: Real> {
    pub start_stamp: T,
    pub dt: T,
    pub states: Vec<DVector<T>>,
    /// Empty for mean-only rollouts, otherwise one per state.
    pub covariances: Vec<DMatrix<T>>,
}

/// Iterates the LKF prediction step `n_p` times from `belief`.
pub fn predict_horizon<T: Real>(
    belief: &VesselBelief<T>,
    model: &DiscreteModel<T>,
    q: &ProcessNoise<T>,
    n_p: usize,
) -> Result<PredictionHorizon<T>> {
    if n_p == 0 {
        return Err(invalid("prediction horizon needs at least one step"));
    }
    let mut states = Vec::with_capacity(n_p + 1);
    let mut covariances = Vec::with_capacity(n_p + 1);
    let mut b = belief.clone();
    states.push(b.mean.clone());
    covariances.push(b.covariance.clone());
    for _ in 0..n_p {
        b = predict_step(&b, model, q);
        states.push(b.mean.clone());
        covariances.push(b.covariance.clone());
    }
    Ok(PredictionHorizon {
        start_stamp: belief.stamp,
        dt: model.dt(),
        states,
        covariances,
    })
}

/// Same rollout as [`predict_horizon`] without covariance propagation.
pub fn predict_mean_horizon<T: Real>(
    belief: &VesselBelief<T>,
    model: &DiscreteModel<T>,
    n_p: usize,
) -> Result<PredictionHorizon<T>> {
    if n_p == 0 {
        return Err(invalid("prediction horizon needs at least one step"));
    }
    let mut states = Vec::with_capacity(n_p + 1);
    states.push(belief.mean.clone());
    for k in 0..n_p {
        let next = step_mean(&states[k], model);
        states.push(next);
    }
    Ok(PredictionHorizon {
        start_stamp: belief.stamp,
        dt: model.dt(),
        states,
        covariances: Vec::new(),
    })
}

fn step_mean<T: Real>(x: &DVector<T>, model: &DiscreteModel<T>) -> DVector<T> {
    let mut next = model.matrix() * x;
    for i in 3..6 {
        next[i] = crate::real::wrap_angle(next[i]);
    }
    next
}

impl<T: Real> PredictionHorizon<T> {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn end_stamp(&self) -> T {
        self.start_stamp + self.dt * lit::<T>(self.steps() as f64)
    }

    /// Index of the entry nearest to `t`.
    pub fn index_at(&self, t: T) -> Result<usize> {
        let tol = self.dt * lit(1e-6);
        if !(t >= self.start_stamp - tol && t <= self.end_stamp() + tol) {
            return Err(CoreError::OutOfRange {
                what: "prediction time",
                value: to_f64(t),
                lo: to_f64(self.start_stamp),
                hi: to_f64(self.end_stamp()),
            });
        }
        let k = ((t - self.start_stamp) / self.dt).round();
        let k = k.to_usize().unwrap_or(0).min(self.steps());
        Ok(k)
    }

    /// World-frame pose of entry `k`.
    pub fn world_pose(&self, k: usize) -> EulerPose<T> {
        let x = &self.states[k];
        let eta_l = EulerPose::wrapped(Vector3::new(x[0], x[1], x[2]), Vector3::new(x[3], x[4], x[5]));
        to_world(&eta_l, x[5])
    }

    /// World-frame linear velocity of entry `k`, `R_psi * (u, v, w)`.
    pub fn world_velocity(&self, k: usize) -> Vector3<T> {
        let x = &self.states[k];
        yaw_matrix(x[5]) * Vector3::new(x[6], x[7], x[8])
    }

    pub fn last(&self) -> &DVector<T> {
        self.states.last().expect("horizon is never empty")
    }
}

/// Nearest-entry world pose at time `t` (no interpolation).
pub fn pose_at<T: Real>(horizon: &PredictionHorizon<T>, t: T) -> Result<EulerPose<T>> {
    Ok(horizon.world_pose(horizon.index_at(t)?))
}
