use nalgebra::{DMatrix, DVector};

use super::belief::VesselBelief;
use super::sensor::{Measurement, MeasurementFrame, SensorModel};
use crate::discrete::DiscreteModel;
use crate::error::{invalid, CoreError, Result};
use crate::model::{state_dim, wave_state_index, CHANNELS, ORIENTATION};
use crate::real::{lit, to_f64, wrap_angle, Real};

/// Discrete process noise covariance `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessNoise<T: Real> {
    pub q: DMatrix<T>,
}

/// Per-step standard deviations used to build a diagonal `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoiseStd<T: Real> {
    pub position: T,
    pub orientation: T,
    pub linear_velocity: T,
    pub angular_velocity: T,
    /// Applied to the second (rate-like) state of every wave component.
    pub wave: T,
}

impl<T: Real> ProcessNoise<T> {
    pub fn new(q: DMatrix<T>) -> Result<Self> {
        if !q.is_square() {
            return Err(invalid("process noise must be square"));
        }
        if (&q - q.transpose()).abs().max() > lit(1e-12) {
            return Err(invalid("process noise must be symmetric"));
        }
        let eig = q.clone().symmetric_eigenvalues();
        if eig.iter().any(|&e| e < lit(-1e-12)) {
            return Err(invalid("process noise must be positive semidefinite"));
        }
        Ok(Self { q })
    }

    /// Block-diagonal `Q`: rigid-body noise plus noise on each wave component's rate state only.
    pub fn diagonal(n_c: usize, std: &ProcessNoiseStd<T>) -> Self {
        let n = state_dim(n_c);
        let mut d = DVector::zeros(n);
        let per = [
            std.position,
            std.orientation,
            std.linear_velocity,
            std.angular_velocity,
        ];
        for (block, s) in per.iter().enumerate() {
            for i in 0..3 {
                d[3 * block + i] = *s * *s;
            }
        }
        for ch in 0..CHANNELS {
            for comp in 0..n_c {
                d[wave_state_index(n_c, ch, comp, 1)] = std.wave * std.wave;
            }
        }
        Self {
            q: DMatrix::from_diagonal(&d),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self { q: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }
}

/// Outcome of a correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction<T: Real> {
    pub belief: VesselBelief<T>,
    pub accepted: bool,
    /// Squared Mahalanobis distance of the innovation.
    pub distance2: T,
}

pub(crate) fn symmetrize<T: Real>(p: &mut DMatrix<T>) {
    let half = lit::<T>(0.5);
    let n = p.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (p[(i, j)] + p[(j, i)]) * half;
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
}

fn wrap_orientation<T: Real>(x: &mut DVector<T>) {
    for i in ORIENTATION {
        x[i] = wrap_angle(x[i]);
    }
}

/// `x <- A_d x`, `P <- A_d P A_d^T + Q`.
pub fn predict_step<T: Real>(belief: &VesselBelief<T>, model: &DiscreteModel<T>, q: &ProcessNoise<T>) -> VesselBelief<T> {
    assert_eq!(belief.dim(), model.dim(), "belief and model dimensions differ");
    assert_eq!(q.dim(), model.dim(), "process noise and model dimensions differ");
    let a = model.matrix();
    let mut mean = a * &belief.mean;
    wrap_orientation(&mut mean);
    let mut covariance = a * &belief.covariance * a.transpose() + &q.q;
    symmetrize(&mut covariance);
    VesselBelief {
        mean,
        covariance,
        stamp: belief.stamp + model.dt(),
    }
}

/// Kalman correction with innovation gating.
///
/// The measurement must already be in vessel-parallel coordinates. A gated
/// measurement returns the prior unchanged with `accepted = false`.
pub fn correct_step<T: Real>(belief: &VesselBelief<T>, meas: &Measurement<T>, sm: &SensorModel<T>) -> Result<Correction<T>> {
    if meas.frame != MeasurementFrame::VesselParallel {
        return Err(invalid(format!(
            "{} measurement must be transformed to the vessel-parallel frame before correction",
            meas.kind
        )));
    }
    if sm.c.ncols() != belief.dim() || sm.dim() != meas.value.len() {
        return Err(invalid(format!("{} observation model does not match state/measurement", meas.kind)));
    }
    let failure = |reason: &str| CoreError::NumericalFailure {
        kind: meas.kind,
        stamp: to_f64(meas.stamp),
        reason: reason.to_string(),
    };

    let c = &sm.c;
    let p = &belief.covariance;
    let mut innovation = &meas.value - c * &belief.mean;
    for (i, angular) in sm.angular_rows.iter().enumerate() {
        if *angular {
            innovation[i] = wrap_angle(innovation[i]);
        }
    }
    let cp = c * p;
    let mut s = &cp * c.transpose() + &meas.noise;
    symmetrize(&mut s);
    let chol = s.cholesky().ok_or_else(|| failure("innovation covariance is not positive definite"))?;
    let distance2 = innovation.dot(&chol.solve(&innovation));
    if !distance2.is_finite() {
        return Err(failure("non-finite Mahalanobis distance"));
    }
    if distance2 > sm.gate_threshold {
        return Ok(Correction {
            belief: belief.clone(),
            accepted: false,
            distance2,
        });
    }

    // G^T = S^-1 C P
    let gain_t = chol.solve(&cp);
    let gain = gain_t.transpose();
    let mut mean = &belief.mean + &gain * innovation;
    wrap_orientation(&mut mean);
    let mut covariance = p - &gain * cp;
    symmetrize(&mut covariance);
    if mean.iter().chain(covariance.iter()).any(|x| !x.is_finite()) {
        return Err(failure("non-finite posterior"));
    }
    Ok(Correction {
        belief: VesselBelief {
            mean,
            covariance,
            stamp: belief.stamp,
        },
        accepted: true,
        distance2,
    })
}
