//! Synthetic sensors with per-sensor random streams.
//!
//! Sensor `m`-th sample is due at `m / rate` and is emitted at the first
//! simulation tick at or after that time. Every due sample consumes the same
//! number of random draws whether or not it is emitted, so streams stay aligned
//! across configurations that differ only in range or dropout.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use usvwave_core::frames::{euler_from_rotation, rotation_zyx};
use usvwave_core::{wrap_angle, EulerPose, Measurement64, SensorKind};

use crate::config::{SensorSpec, SensorsConfig};
use crate::error::{Result, SimError};
use crate::truth::TruthState;

/// Smallest variance attached to a measurement, keeping `R` positive definite.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Random stream ids; the scenario uses the ones after the sensors.
pub(crate) const STREAM_TRUTH: u64 = 4;
pub(crate) const STREAM_ESTIMATOR: u64 = 5;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone)]
pub struct SensorSuite {
    specs: [SensorSpec; 4],
    observer_position_std: f64,
    observer_angle_std: f64,
    rngs: [ChaCha8Rng; 4],
    /// Index of the next due sample per sensor.
    next: [u64; 4],
    dt: f64,
}

impl SensorSuite {
    pub fn new(cfg: &SensorsConfig, seed: u64, sim_dt: f64) -> Self {
        Self {
            specs: SensorKind::ALL.map(|k| cfg.spec(k).clone()),
            observer_position_std: cfg.observer_position_std,
            observer_angle_std: cfg.observer_angle_std,
            rngs: SensorKind::ALL.map(|k| stream(seed, k.index() as u64)),
            next: [0; 4],
            dt: sim_dt,
        }
    }

    /// Tick at which sample `m` of sensor `i` is emitted.
    fn due_tick(&self, i: usize, m: u64) -> u64 {
        let t = m as f64 / self.specs[i].rate;
        (t / self.dt - 1e-9).ceil().max(0.0) as u64
    }

    /// Measurements produced at simulation tick `tick`, in sensor-kind order.
    pub fn emit(&mut self, tick: u64, state: &TruthState) -> Result<Vec<Measurement64>> {
        let mut out = Vec::new();
        for kind in SensorKind::ALL {
            let i = kind.index();
            let mut due = false;
            while self.due_tick(i, self.next[i]) <= tick {
                self.next[i] += 1;
                due = true;
            }
            if due {
                if let Some(m) = self.sample(kind, state)? {
                    out.push(m);
                }
            }
        }
        Ok(out)
    }

    fn sample(&mut self, kind: SensorKind, state: &TruthState) -> Result<Option<Measurement64>> {
        let i = kind.index();
        let spec = &self.specs[i];
        let rng = &mut self.rngs[i];
        let dim = kind.dim();
        let noise: Vec<f64> = (0..dim).map(|k| spec.noise_std[k] * rng.sample::<f64, _>(StandardNormal)).collect();
        let observer: [f64; 6] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        let dropped = rng.random::<f64>() < spec.dropout;

        let stamp = state.clock;
        let pose = state.pose();
        let variances = |extra: &[f64]| {
            DMatrix::from_diagonal(&DVector::from_fn(dim, |k, _| {
                (spec.noise_std[k].powi(2) + extra[k]).max(VARIANCE_FLOOR)
            }))
        };
        let meas = match kind {
            SensorKind::Gps => {
                let value = DVector::from_fn(3, |k, _| pose.position[k] + noise[k]);
                Measurement64::new(stamp, kind, value, variances(&[0.0; 3]), None)
            }
            SensorKind::Imu => {
                let value = DVector::from_fn(6, |k, _| {
                    if k < 3 {
                        wrap_angle(pose.orientation[k] + noise[k])
                    } else {
                        state.nu[k] + noise[k]
                    }
                });
                Measurement64::new(stamp, kind, value, variances(&[0.0; 6]), None)
            }
            SensorKind::Uvdar | SensorKind::AprilTag => {
                let uav = state.uav.position;
                let range = (pose.position - uav).norm();
                if dropped || spec.max_range.is_some_and(|r| range > r) {
                    return Ok(None);
                }
                // the UAV flies level; its attitude is the identity
                let rel_p = pose.position - uav;
                let rel_a = euler_from_rotation(&rotation_zyx(&pose.orientation));
                let value = DVector::from_fn(6, |k, _| {
                    if k < 3 {
                        rel_p[k] + noise[k]
                    } else {
                        wrap_angle(rel_a[k - 3] + noise[k])
                    }
                });
                let sp = self.observer_position_std;
                let sa = self.observer_angle_std;
                let observer_pose = EulerPose {
                    position: uav + Vector3::new(observer[0], observer[1], observer[2]) * sp,
                    orientation: Vector3::new(observer[3], observer[4], observer[5]) * sa,
                };
                let pos_extra = sp * sp + (sa * range).powi(2);
                let extra = [pos_extra, pos_extra, pos_extra, sa * sa, sa * sa, sa * sa];
                Measurement64::new(stamp, kind, value, variances(&extra), Some(observer_pose))
            }
        };
        meas.map(Some).map_err(SimError::core(stamp))
    }
}

/// One tick of [`SensorSuite::emit`], under the usual name.
pub fn emit_measurements(suite: &mut SensorSuite, tick: u64, state: &TruthState) -> Result<Vec<Measurement64>> {
    suite.emit(tick, state)
}
