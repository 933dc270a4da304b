use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{invalid, Result};
use crate::frames::{to_world, BodyVelocity, EulerPose};
use crate::model::{state_dim, RIGID_STATES};
use crate::real::{lit, Real};

/// Filter mean `x_usv`, covariance `P` and time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselBelief<T: Real> {
    pub mean: DVector<T>,
    pub covariance: DMatrix<T>,
    pub stamp: T,
}

impl<T: Real> VesselBelief<T> {
    pub fn new(mean: DVector<T>, covariance: DMatrix<T>, stamp: T) -> Result<Self> {
        let n = mean.len();
        if n < RIGID_STATES || (n - RIGID_STATES) % RIGID_STATES != 0 {
            return Err(invalid(format!("state dimension {n} is not 12 (1 + N_c)")));
        }
        if covariance.shape() != (n, n) {
            return Err(invalid(format!(
                "covariance is {:?}, expected {n}x{n}",
                covariance.shape()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|x| !x.is_finite()) || !stamp.is_finite() {
            return Err(invalid("belief contains non-finite values"));
        }
        let asym = (&covariance - covariance.transpose()).abs().max();
        if asym > lit(1e-9) {
            return Err(invalid("covariance is not symmetric"));
        }
        Ok(Self { mean, covariance, stamp })
    }

    /// Belief with diagonal covariance.
    pub fn with_diagonal(mean: DVector<T>, variances: &DVector<T>, stamp: T) -> Result<Self> {
        Self::new(mean, DMatrix::from_diagonal(variances), stamp)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_c(&self) -> usize {
        self.dim() / RIGID_STATES - 1
    }

    /// Pose in the vessel-parallel frame.
    pub fn eta_l(&self) -> EulerPose<T> {
        pose_of(&self.mean)
    }

    pub fn yaw(&self) -> T {
        self.mean[5]
    }

    /// Pose mapped to the world frame with the estimated yaw.
    pub fn world_pose(&self) -> EulerPose<T> {
        to_world(&self.eta_l(), self.yaw())
    }

    pub fn body_velocity(&self) -> BodyVelocity<T> {
        BodyVelocity {
            linear: self.mean.fixed_rows::<3>(6).into(),
            angular: self.mean.fixed_rows::<3>(9).into(),
        }
    }

    pub(crate) fn check_dim(&self, n_c: usize) -> bool {
        self.dim() == state_dim(n_c)
    }
}

pub(crate) fn pose_of<T: Real>(x: &DVector<T>) -> EulerPose<T> {
    EulerPose::wrapped(
        Vector3::new(x[0], x[1], x[2]),
        Vector3::new(x[3], x[4], x[5]),
    )
}
