//! Sensor kinds, measurements and the observation models used in correction.
//!
//! Raw measurement values per kind:
//!
//! | kind       | value                                                     |
//! |------------|-----------------------------------------------------------|
//! | `Gps`      | world position `(x, y, z)`                                |
//! | `Imu`      | `(roll, pitch, yaw, p, q, r)`                             |
//! | `Uvdar`    | USV position in the observer body frame, then the USV     |
//! | `AprilTag` | attitude relative to the observer as roll/pitch/yaw       |
//!
//! After [`transform_measurement`] every value is expressed in the filter's
//! vessel-parallel coordinates and lines up with the rows of the sensor's `C`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};
use crate::frames::{euler_from_rotation, rotation_zyx, yaw_matrix, EulerPose};
use crate::model::state_dim;
use crate::real::{lit, Real};

/// Sensor sources. The declaration order is the tie-break order for
/// measurements sharing a stamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SensorKind {
    Gps,
    Imu,
    Uvdar,
    AprilTag,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [SensorKind::Gps, SensorKind::Imu, SensorKind::Uvdar, SensorKind::AprilTag];

    /// State indices observed by this sensor, in measurement-row order.
    pub fn observed_states(self) -> &'static [usize] {
        match self {
            SensorKind::Gps => &[0, 1, 2],
            SensorKind::Imu => &[3, 4, 5, 9, 10, 11],
            SensorKind::Uvdar | SensorKind::AprilTag => &[0, 1, 2, 3, 4, 5],
        }
    }

    pub fn dim(self) -> usize {
        self.observed_states().len()
    }

    /// Relative sensors ride on the UAV and need the observer pose.
    pub fn is_relative(self) -> bool {
        matches!(self, SensorKind::Uvdar | SensorKind::AprilTag)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Gps => "gps",
            SensorKind::Imu => "imu",
            SensorKind::Uvdar => "uvdar",
            SensorKind::AprilTag => "apriltag",
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensorKind {
    type Err = crate::error::CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gps" => Ok(SensorKind::Gps),
            "imu" => Ok(SensorKind::Imu),
            "uvdar" => Ok(SensorKind::Uvdar),
            "apriltag" => Ok(SensorKind::AprilTag),
            other => Err(invalid(format!("unknown sensor kind '{other}'"))),
        }
    }
}

/// Coordinates a measurement value is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementFrame {
    /// As produced by the sensor.
    Sensor,
    /// Rotated into the vessel-parallel frame, ready for correction.
    VesselParallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement<T: Real> {
    pub stamp: T,
    pub kind: SensorKind,
    pub value: DVector<T>,
    pub noise: DMatrix<T>,
    pub observer_pose: Option<EulerPose<T>>,
    pub frame: MeasurementFrame,
}

impl<T: Real> Measurement<T> {
    /// Raw sensor-frame measurement.
    pub fn new(
        stamp: T,
        kind: SensorKind,
        value: DVector<T>,
        noise: DMatrix<T>,
        observer_pose: Option<EulerPose<T>>,
    ) -> Result<Self> {
        let m = Self {
            stamp,
            kind,
            value,
            noise,
            observer_pose,
            frame: MeasurementFrame::Sensor,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let dim = self.kind.dim();
        if self.value.len() != dim || self.noise.shape() != (dim, dim) {
            return Err(invalid(format!("{} measurement must have dimension {dim}", self.kind)));
        }
        if !self.stamp.is_finite() || self.value.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("{} measurement has non-finite values", self.kind)));
        }
        let asym = (&self.noise - self.noise.transpose()).abs().max();
        if asym > lit(1e-9) || self.noise.clone().cholesky().is_none() {
            return Err(invalid(format!("{} noise covariance is not symmetric positive definite", self.kind)));
        }
        if self.kind.is_relative() != self.observer_pose.is_some() {
            return Err(invalid(format!(
                "{} measurement: observer pose must be present exactly for relative sensors",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Per-sensor filter settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSettings<T: Real> {
    /// One standard deviation per observed variable.
    pub noise_std: Vec<T>,
    /// Chi-square probability of the innovation gate; `None` disables gating.
    pub gate_probability: Option<f64>,
}

/// Observation matrix, nominal noise and innovation gate of one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel<T: Real> {
    pub kind: SensorKind,
    pub c: DMatrix<T>,
    pub base_noise: DMatrix<T>,
    /// Threshold on the squared Mahalanobis distance of the innovation.
    pub gate_threshold: T,
    /// Rows whose innovation is an angle and gets wrapped.
    pub angular_rows: Vec<bool>,
}

impl<T: Real> SensorModel<T> {
    /// Arbitrary observation model, mostly for tests.
    pub fn custom(
        kind: SensorKind,
        c: DMatrix<T>,
        base_noise: DMatrix<T>,
        gate_threshold: T,
        angular_rows: Vec<bool>,
    ) -> Result<Self> {
        let m = c.nrows();
        if base_noise.shape() != (m, m) || angular_rows.len() != m {
            return Err(invalid("sensor model dimensions disagree"));
        }
        Ok(Self {
            kind,
            c,
            base_noise,
            gate_threshold,
            angular_rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }
}

/// Builds the selector observation model for `kind` over a state with `n_c` wave components.
pub fn sensor_model_for<T: Real>(kind: SensorKind, settings: &SensorSettings<T>, n_c: usize) -> Result<SensorModel<T>> {
    let rows = kind.observed_states();
    if settings.noise_std.len() != rows.len() {
        return Err(invalid(format!(
            "{kind} needs {} noise standard deviations, got {}",
            rows.len(),
            settings.noise_std.len()
        )));
    }
    if settings.noise_std.iter().any(|s| !(s.is_finite() && *s >= T::zero())) {
        return Err(invalid(format!("{kind} noise standard deviations must be finite and >= 0")));
    }
    let n = state_dim(n_c);
    let mut c = DMatrix::zeros(rows.len(), n);
    for (row, &state) in rows.iter().enumerate() {
        c[(row, state)] = T::one();
    }
    let base_noise = DMatrix::from_diagonal(&DVector::from_iterator(
        rows.len(),
        settings.noise_std.iter().map(|s| *s * *s),
    ));
    let gate_threshold = match settings.gate_probability {
        None => T::max_value().unwrap_or_else(|| lit(f64::MAX)),
        Some(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(invalid(format!("{kind} gate probability must lie in (0, 1), got {p}")));
            }
            let chi2 = ChiSquared::new(rows.len() as f64).map_err(|e| invalid(e.to_string()))?;
            lit(chi2.inverse_cdf(p))
        }
    };
    let angular_rows = rows.iter().map(|&s| (3..6).contains(&s)).collect();
    Ok(SensorModel {
        kind,
        c,
        base_noise,
        gate_threshold,
        angular_rows,
    })
}

/// Rotates a raw measurement into the vessel-parallel frame using the current yaw estimate.
///
/// GPS positions are rotated by `J_psi(-yaw)`. IMU values pass through. Relative
/// poses are composed with the observer pose into a world pose, whose position is
/// then rotated like GPS while the attitude passes through.
pub fn transform_measurement<T: Real>(meas: &Measurement<T>, current_yaw: T) -> Result<Measurement<T>> {
    if meas.frame == MeasurementFrame::VesselParallel {
        return Ok(meas.clone());
    }
    let to_vp = yaw_matrix(current_yaw).transpose();
    let mut out = meas.clone();
    out.frame = MeasurementFrame::VesselParallel;
    match meas.kind {
        SensorKind::Gps => {
            let p = Vector3::new(meas.value[0], meas.value[1], meas.value[2]);
            out.value = DVector::from_column_slice((to_vp * p).as_slice());
            out.noise = rotate_block(&meas.noise, &to_vp, 0);
        }
        SensorKind::Imu => {}
        SensorKind::Uvdar | SensorKind::AprilTag => {
            let obs = meas
                .observer_pose
                .as_ref()
                .ok_or_else(|| invalid(format!("{} measurement without observer pose", meas.kind)))?;
            let r_obs = obs.rotation();
            let rel_p = Vector3::new(meas.value[0], meas.value[1], meas.value[2]);
            let rel_a = Vector3::new(meas.value[3], meas.value[4], meas.value[5]);
            let world_p = obs.position + r_obs * rel_p;
            let world_a = euler_from_rotation(&(r_obs * rotation_zyx(&rel_a)));
            let p_l = to_vp * world_p;
            out.value = DVector::from_column_slice(&[p_l.x, p_l.y, p_l.z, world_a.x, world_a.y, world_a.z]);
            out.noise = rotate_block(&meas.noise, &(to_vp * r_obs), 0);
        }
    }
    Ok(out)
}

/// Applies `rot` to the 3x3 block starting at `at` (and its cross terms).
fn rotate_block<T: Real>(noise: &DMatrix<T>, rot: &Matrix3<T>, at: usize) -> DMatrix<T> {
    let m = noise.nrows();
    let mut t = DMatrix::<T>::identity(m, m);
    t.view_mut((at, at), (3, 3)).copy_from(rot);
    let out = &t * noise * t.transpose();
    (&out + out.transpose()) * lit::<T>(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn settings(kind: SensorKind) -> SensorSettings<f64> {
        SensorSettings {
            noise_std: vec![0.1; kind.dim()],
            gate_probability: Some(0.999),
        }
    }

    fn gps(x: f64, y: f64, z: f64) -> Measurement<f64> {
        Measurement::new(
            0.0,
            SensorKind::Gps,
            DVector::from_column_slice(&[x, y, z]),
            DMatrix::identity(3, 3),
            None,
        )
        .unwrap()
    }

    #[test]
    fn gps_and_imu_selectors() {
        let g = sensor_model_for(SensorKind::Gps, &settings(SensorKind::Gps), 2).unwrap();
        assert_eq!(g.c.shape(), (3, 36));
        for i in 0..3 {
            assert_eq!(g.c[(i, i)], 1.0);
        }
        let imu = sensor_model_for(SensorKind::Imu, &settings(SensorKind::Imu), 2).unwrap();
        let cols: Vec<usize> = (0..6).map(|r| (0..36).find(|&c| imu.c[(r, c)] == 1.0).unwrap()).collect();
        assert_eq!(cols, vec![3, 4, 5, 9, 10, 11]);
        assert_eq!(imu.angular_rows, vec![true, true, true, false, false, false]);
    }

    #[test]
    fn selectors_are_orthonormal_and_ignore_waves() {
        for kind in SensorKind::ALL {
            let m = sensor_model_for(kind, &settings(kind), 2).unwrap();
            let cct = &m.c * m.c.transpose();
            assert_eq!(cct, DMatrix::identity(kind.dim(), kind.dim()));
            assert!(m.c.columns(12, 24).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gate_threshold_is_chi_square_quantile() {
        let g = sensor_model_for(SensorKind::Gps, &settings(SensorKind::Gps), 0).unwrap();
        assert_relative_eq!(g.gate_threshold, 16.266, epsilon = 1e-3);
        let v = sensor_model_for(SensorKind::Uvdar, &settings(SensorKind::Uvdar), 0).unwrap();
        assert_relative_eq!(v.gate_threshold, 22.458, epsilon = 1e-3);
        let open = SensorSettings {
            noise_std: vec![0.1; 3],
            gate_probability: None,
        };
        let g = sensor_model_for(SensorKind::Gps, &open, 0).unwrap();
        assert_eq!(g.gate_threshold, f64::MAX);
    }

    #[test]
    fn sensor_model_rejects_bad_settings() {
        let short = SensorSettings {
            noise_std: vec![0.1; 2],
            gate_probability: None,
        };
        assert!(sensor_model_for(SensorKind::Gps, &short, 0).is_err());
        let bad_gate = SensorSettings {
            noise_std: vec![0.1; 3],
            gate_probability: Some(1.5),
        };
        assert!(sensor_model_for(SensorKind::Gps, &bad_gate, 0).is_err());
        assert!("sonar".parse::<SensorKind>().is_err());
        assert_eq!("AprilTag".parse::<SensorKind>().unwrap(), SensorKind::AprilTag);
    }

    #[test]
    fn gps_rotation_examples() {
        let t = transform_measurement(&gps(1.0, 2.0, 3.0), 0.0).unwrap();
        assert_eq!(t.value.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(t.frame, MeasurementFrame::VesselParallel);
        let t = transform_measurement(&gps(1.0, 0.0, 0.0), FRAC_PI_2).unwrap();
        assert_relative_eq!(t.value, DVector::from_column_slice(&[0.0, -1.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn relative_pose_is_composed_with_observer() {
        let observer = EulerPose::new(Vector3::new(10.0, 0.0, 5.0), Vector3::zeros()).unwrap();
        let m = Measurement::new(
            0.0,
            SensorKind::AprilTag,
            DVector::from_column_slice(&[0.0, 0.0, -5.0, 0.0, 0.0, 0.0]),
            DMatrix::identity(6, 6) * 0.01,
            Some(observer),
        )
        .unwrap();
        let t = transform_measurement(&m, 0.0).unwrap();
        assert_relative_eq!(
            t.value,
            DVector::from_column_slice(&[10.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            epsilon = 1e-12
        );
    }

    #[test]
    fn relative_attitude_composes_with_observer_yaw() {
        let observer = EulerPose::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 0.5)).unwrap();
        let m = Measurement::new(
            0.0,
            SensorKind::Uvdar,
            DVector::from_column_slice(&[1.0, 0.0, -3.0, 0.0, 0.0, 0.25]),
            DMatrix::identity(6, 6),
            Some(observer),
        )
        .unwrap();
        let t = transform_measurement(&m, 0.75).unwrap();
        assert_relative_eq!(t.value[5], 0.75, epsilon = 1e-12);
        // world point (cos .5, sin .5) seen from a frame yawed by .75
        assert_relative_eq!(t.value[0], (0.5f64 - 0.75).cos(), epsilon = 1e-12);
        assert_relative_eq!(t.value[1], (0.5f64 - 0.75).sin(), epsilon = 1e-12);
    }

    #[test]
    fn missing_observer_is_invalid() {
        let bad = Measurement::new(
            0.0,
            SensorKind::Uvdar,
            DVector::zeros(6),
            DMatrix::identity(6, 6),
            None,
        );
        assert!(bad.is_err());
        // forged past the constructor
        let mut m = Measurement::new(
            0.0,
            SensorKind::Uvdar,
            DVector::zeros(6),
            DMatrix::identity(6, 6),
            Some(EulerPose::origin()),
        )
        .unwrap();
        m.observer_pose = None;
        assert!(transform_measurement(&m, 0.0).is_err());
    }

    #[test]
    fn measurement_validation() {
        let not_pd = Measurement::new(
            0.0,
            SensorKind::Gps,
            DVector::zeros(3),
            DMatrix::zeros(3, 3),
            None,
        );
        assert!(not_pd.is_err());
        let wrong_dim = Measurement::new(0.0, SensorKind::Imu, DVector::zeros(3), DMatrix::identity(3, 3), None);
        assert!(wrong_dim.is_err());
        let gps_with_observer = Measurement::new(
            0.0,
            SensorKind::Gps,
            DVector::zeros(3),
            DMatrix::identity(3, 3),
            Some(EulerPose::origin()),
        );
        assert!(gps_with_observer.is_err());
    }

    #[test]
    fn gps_noise_is_rotated() {
        let mut m = gps(0.0, 0.0, 0.0);
        m.noise = DMatrix::from_diagonal(&DVector::from_column_slice(&[4.0, 1.0, 1.0]));
        let t = transform_measurement(&m, FRAC_PI_2).unwrap();
        assert_relative_eq!(t.noise[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.noise[(1, 1)], 4.0, epsilon = 1e-12);
    }
}
