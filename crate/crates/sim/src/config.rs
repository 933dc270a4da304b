//! Scenario configuration. Every struct rejects unknown keys; missing keys take
//! the defaults below, which together form the default wavy scenario.

use serde::{Deserialize, Serialize};
use usvwave_core::planner::{FollowConfig, LandingConfig};
use usvwave_core::{
    ProcessNoiseStd, RigidBodyParams, SensorKind, SensorSettings, WaveBank, WaveComponentParams,
};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Follow,
    Land,
    EstimateOnly,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Follow => "follow",
            Task::Land => "land",
            Task::EstimateOnly => "estimate-only",
        }
    }
}

/// Which sensors the estimator fuses and whether it carries wave states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    FullFusion,
    GpsOnly,
    ImuOnly,
    UvdarOnly,
    ApriltagOnly,
    /// All sensors, `N_c = 0`.
    NoWaveModel,
    /// AprilTag only, `N_c = 0`: a vision-only estimator without wave states.
    SotaProxy,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::FullFusion,
        Variant::GpsOnly,
        Variant::ImuOnly,
        Variant::UvdarOnly,
        Variant::ApriltagOnly,
        Variant::NoWaveModel,
        Variant::SotaProxy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::FullFusion => "full-fusion",
            Variant::GpsOnly => "gps-only",
            Variant::ImuOnly => "imu-only",
            Variant::UvdarOnly => "uvdar-only",
            Variant::ApriltagOnly => "apriltag-only",
            Variant::NoWaveModel => "no-wave-model",
            Variant::SotaProxy => "sota-proxy",
        }
    }

    pub fn fused(self) -> Vec<SensorKind> {
        match self {
            Variant::FullFusion | Variant::NoWaveModel => SensorKind::ALL.to_vec(),
            Variant::GpsOnly => vec![SensorKind::Gps],
            Variant::ImuOnly => vec![SensorKind::Imu],
            Variant::UvdarOnly => vec![SensorKind::Uvdar],
            Variant::ApriltagOnly | Variant::SotaProxy => vec![SensorKind::AprilTag],
        }
    }

    pub fn wave_model(self) -> bool {
        !matches!(self, Variant::NoWaveModel | Variant::SotaProxy)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| SimError::config("variant", format!("unknown variant `{s}`")))
    }
}

/// Body velocity channel a truth wave component drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    U,
    V,
    W,
    P,
    Q,
    R,
}

impl Channel {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VesselConfig {
    pub inertia: [f64; 6],
    pub added_mass: [f64; 6],
    pub damping: [f64; 6],
    pub restoring: [f64; 6],
    /// World pose `(x, y, z, roll, pitch, yaw)` at t = 0.
    pub initial_pose: [f64; 6],
    /// Body velocity `(u, v, w, p, q, r)` at t = 0.
    pub initial_velocity: [f64; 6],
}

impl Default for VesselConfig {
    fn default() -> Self {
        Self {
            inertia: [180.0, 180.0, 180.0, 30.0, 60.0, 80.0],
            added_mass: [20.0, 60.0, 90.0, 10.0, 20.0, 20.0],
            damping: [70.0, 100.0, 300.0, 40.0, 80.0, 100.0],
            restoring: [0.0, 0.0, 2000.0, 300.0, 600.0, 0.0],
            initial_pose: [0.0; 6],
            initial_velocity: [0.0; 6],
        }
    }
}

impl VesselConfig {
    pub fn rigid(&self) -> RigidBodyParams<f64> {
        RigidBodyParams::diagonal(self.inertia, self.added_mass, self.damping, self.restoring)
    }
}

/// One oscillator of the truth wave spectrum. Its rate state, of peak value
/// `amplitude`, is added to the acceleration of `channel`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthWave {
    pub channel: Channel,
    pub omega0: f64,
    #[serde(default)]
    pub lambda: f64,
    pub amplitude: f64,
}

/// Piecewise-constant propulsion, active from `start` until the next segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSegment {
    pub start: f64,
    /// Body-x force, N.
    #[serde(default)]
    pub surge_thrust: f64,
    /// Commanded yaw rate, rad/s (converted to a moment through the yaw damping).
    #[serde(default)]
    pub yaw_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthMode {
    /// Full Euler kinematics, RK4, wave spectrum from `waves`.
    Nonlinear,
    /// The estimator's own linear model, propagated exactly. Forcing is ignored.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthConfig {
    pub mode: TruthMode,
    /// Integration step, s.
    pub dt: f64,
    pub waves: Vec<TruthWave>,
    pub forcing: Vec<ForcingSegment>,
    /// Linear mode: peak rate-state value of every estimator wave component, per channel.
    pub linear_wave_amplitude: [f64; 6],
}

impl Default for TruthConfig {
    fn default() -> Self {
        let wave = |channel, omega0, amplitude| TruthWave {
            channel,
            omega0,
            lambda: 0.0,
            amplitude,
        };
        Self {
            mode: TruthMode::Nonlinear,
            dt: 0.005,
            waves: vec![
                wave(Channel::W, 0.9, 0.5),
                wave(Channel::W, 1.3, 0.6),
                wave(Channel::W, 1.9, 0.4),
                wave(Channel::P, 0.9, 0.15),
                wave(Channel::P, 1.3, 0.2),
                wave(Channel::P, 1.9, 0.15),
                wave(Channel::Q, 0.9, 0.15),
                wave(Channel::Q, 1.3, 0.2),
                wave(Channel::Q, 1.9, 0.15),
            ],
            forcing: vec![ForcingSegment {
                start: 0.0,
                surge_thrust: 3.5,
                yaw_rate: 0.0,
            }],
            linear_wave_amplitude: [0.0, 0.0, 0.5, 0.15, 0.15, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub rate: f64,
    /// One standard deviation per observed variable.
    pub noise_std: Vec<f64>,
    #[serde(default)]
    pub dropout: f64,
    /// Vision sensors only: no detection beyond this UAV-USV distance, m.
    #[serde(default)]
    pub max_range: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorsConfig {
    pub gps: SensorSpec,
    pub imu: SensorSpec,
    pub uvdar: SensorSpec,
    pub apriltag: SensorSpec,
    /// UAV self-localization error on the observer pose of relative measurements.
    pub observer_position_std: f64,
    pub observer_angle_std: f64,
}

impl Default for SensorsConfig {
    fn default() -> Self {
        Self {
            gps: SensorSpec {
                rate: 10.0,
                noise_std: vec![1.0, 1.0, 1.0],
                dropout: 0.0,
                max_range: None,
            },
            imu: SensorSpec {
                rate: 100.0,
                noise_std: vec![0.01, 0.01, 0.01, 0.02, 0.02, 0.02],
                dropout: 0.0,
                max_range: None,
            },
            uvdar: SensorSpec {
                rate: 30.0,
                noise_std: vec![0.3, 0.3, 0.3, 0.1, 0.1, 0.1],
                dropout: 0.05,
                max_range: Some(15.0),
            },
            apriltag: SensorSpec {
                rate: 30.0,
                noise_std: vec![0.05, 0.05, 0.05, 0.05, 0.05, 0.05],
                dropout: 0.05,
                max_range: Some(8.0),
            },
            observer_position_std: 0.05,
            observer_angle_std: 0.01,
        }
    }
}

impl SensorsConfig {
    pub fn spec(&self, kind: SensorKind) -> &SensorSpec {
        match kind {
            SensorKind::Gps => &self.gps,
            SensorKind::Imu => &self.imu,
            SensorKind::Uvdar => &self.uvdar,
            SensorKind::AprilTag => &self.apriltag,
        }
    }

    pub(crate) fn key(kind: SensorKind) -> &'static str {
        match kind {
            SensorKind::Gps => "sensors.gps",
            SensorKind::Imu => "sensors.imu",
            SensorKind::Uvdar => "sensors.uvdar",
            SensorKind::AprilTag => "sensors.apriltag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveParams {
    pub omega0: f64,
    #[serde(default)]
    pub lambda: f64,
}

/// Per-step standard deviations, grouped like the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateStd {
    pub position: f64,
    pub orientation: f64,
    pub linear_velocity: f64,
    pub angular_velocity: f64,
    pub wave: f64,
}

impl Default for StateStd {
    fn default() -> Self {
        Self {
            position: 0.0,
            orientation: 0.0,
            linear_velocity: 0.0,
            angular_velocity: 0.0,
            wave: 0.0,
        }
    }
}

impl StateStd {
    pub fn to_core(self) -> ProcessNoiseStd<f64> {
        ProcessNoiseStd {
            position: self.position,
            orientation: self.orientation,
            linear_velocity: self.linear_velocity,
            angular_velocity: self.angular_velocity,
            wave: self.wave,
        }
    }

    fn values(&self) -> [(&'static str, f64); 5] {
        [
            ("position", self.position),
            ("orientation", self.orientation),
            ("linear_velocity", self.linear_velocity),
            ("angular_velocity", self.angular_velocity),
            ("wave", self.wave),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// Filter period, s.
    pub dt: f64,
    /// Wave bank shared by all six channels (`N_c` = its length).
    pub waves: Vec<WaveParams>,
    /// Chi-square probability of the innovation gate; absent disables gating.
    pub gate_probability: Option<f64>,
    pub process_noise: StateStd,
    /// Initial covariance and spread of the initial estimate around the truth.
    pub initial_std: StateStd,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            waves: vec![
                WaveParams {
                    omega0: 1.0,
                    lambda: 0.05,
                },
                WaveParams {
                    omega0: 1.7,
                    lambda: 0.05,
                },
            ],
            gate_probability: Some(0.999),
            process_noise: StateStd {
                position: 0.001,
                orientation: 0.001,
                linear_velocity: 0.01,
                angular_velocity: 0.01,
                wave: 0.02,
            },
            initial_std: StateStd {
                position: 0.5,
                orientation: 0.05,
                linear_velocity: 0.2,
                angular_velocity: 0.05,
                wave: 0.2,
            },
        }
    }
}

impl EstimatorConfig {
    pub fn bank(&self) -> Result<WaveBank<f64>> {
        let comps = self
            .waves
            .iter()
            .map(|w| WaveComponentParams::new(w.omega0, w.lambda))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| SimError::config("estimator.waves", e.to_string()))?;
        if comps.is_empty() {
            Ok(WaveBank::empty())
        } else {
            WaveBank::new(comps).map_err(|e| SimError::config("estimator.waves", e.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorConfig {
    /// Horizon length `N_p` in estimator steps.
    pub steps: usize,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self { steps: 200 }
    }
}

/// Point-mass UAV tracking planner setpoints with a PD law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UavConfig {
    pub initial_position: [f64; 3],
    pub kp: f64,
    pub kd: f64,
    /// Physical per-axis acceleration limit, m/s^2.
    pub max_accel: f64,
}

impl Default for UavConfig {
    fn default() -> Self {
        Self {
            initial_position: [0.0, 0.0, 3.0],
            kp: 16.0,
            kd: 8.0,
            max_accel: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub follow: FollowConfig,
    pub landing: LandingConfig,
}

/// When the land task asks the planner to land.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandingTaskConfig {
    /// First landing command, s.
    pub start: f64,
    /// Wait after an abort before commanding again, s.
    pub retry_delay: f64,
}

impl Default for LandingTaskConfig {
    fn default() -> Self {
        Self {
            start: 5.0,
            retry_delay: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub duration: f64,
    pub seed: u64,
    pub task: Task,
    pub variant: Variant,
    /// Leading interval excluded from the metrics, s.
    pub warmup: f64,
    pub vessel: VesselConfig,
    pub truth: TruthConfig,
    pub sensors: SensorsConfig,
    pub estimator: EstimatorConfig,
    pub predictor: PredictorConfig,
    pub uav: UavConfig,
    pub planner: PlannerConfig,
    pub landing_task: LandingTaskConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration: 60.0,
            seed: 1,
            task: Task::Follow,
            variant: Variant::FullFusion,
            warmup: 5.0,
            vessel: VesselConfig::default(),
            truth: TruthConfig::default(),
            sensors: SensorsConfig::default(),
            estimator: EstimatorConfig::default(),
            predictor: PredictorConfig::default(),
            uav: UavConfig::default(),
            planner: PlannerConfig::default(),
            landing_task: LandingTaskConfig::default(),
        }
    }
}

/// Number of `small` periods in `large`, if it is a whole number.
pub(crate) fn ratio(large: f64, small: f64) -> Option<u64> {
    let r = large / small;
    let n = r.round();
    ((r - n).abs() < 1e-9 && n >= 1.0).then_some(n as u64)
}

impl ScenarioConfig {
    /// Semantic checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        finite_non_negative("duration", self.duration)?;
        finite_non_negative("warmup", self.warmup)?;
        positive("truth.dt", self.truth.dt)?;
        positive("estimator.dt", self.estimator.dt)?;
        if ratio(self.estimator.dt, self.truth.dt).is_none() {
            return Err(SimError::config(
                "estimator.dt",
                "must be a whole multiple of truth.dt (sim dt <= estimator dt)",
            ));
        }
        let follow = &self.planner.follow;
        follow
            .validate()
            .map_err(|e| SimError::config("planner.follow", e.to_string()))?;
        self.planner
            .landing
            .validate()
            .map_err(|e| SimError::config("planner.landing", e.to_string()))?;
        if ratio(follow.dt, self.estimator.dt).is_none() {
            return Err(SimError::config(
                "planner.follow.dt",
                "must be a whole multiple of estimator.dt",
            ));
        }
        if self.predictor.steps == 0 {
            return Err(SimError::config("predictor.steps", "must be at least 1"));
        }
        if self.task != Task::EstimateOnly
            && (self.predictor.steps as f64) * self.estimator.dt < follow.window() - 1e-9
        {
            return Err(SimError::config(
                "predictor.steps",
                "prediction horizon is shorter than the MPC window",
            ));
        }
        for (i, v) in self.vessel.inertia.iter().enumerate() {
            if !(v + self.vessel.added_mass[i] > 0.0) {
                return Err(SimError::config("vessel.inertia", "inertia + added_mass must be positive"));
            }
        }
        for (key, arr) in [
            ("vessel.damping", &self.vessel.damping),
            ("vessel.restoring", &self.vessel.restoring),
        ] {
            if arr.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(SimError::config(key, "entries must be finite and >= 0"));
            }
        }
        if self.vessel.initial_pose[4].abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(SimError::config("vessel.initial_pose", "pitch must be within (-pi/2, pi/2)"));
        }
        for (i, w) in self.truth.waves.iter().enumerate() {
            let key = format!("truth.waves[{i}]");
            if !(w.omega0.is_finite() && w.omega0 > 0.0) {
                return Err(SimError::config(key, "omega0 must be positive"));
            }
            if !(w.lambda.is_finite() && w.lambda >= 0.0) {
                return Err(SimError::config(key, "lambda must be >= 0"));
            }
            if !w.amplitude.is_finite() {
                return Err(SimError::config(key, "amplitude must be finite"));
            }
        }
        let mut last = f64::NEG_INFINITY;
        for (i, f) in self.truth.forcing.iter().enumerate() {
            if !(f.start.is_finite() && f.start > last) {
                return Err(SimError::config(
                    format!("truth.forcing[{i}]"),
                    "segment starts must be finite and strictly increasing",
                ));
            }
            last = f.start;
        }
        for kind in SensorKind::ALL {
            let key = SensorsConfig::key(kind);
            let spec = self.sensors.spec(kind);
            positive(&format!("{key}.rate"), spec.rate)?;
            if spec.noise_std.len() != kind.dim() {
                return Err(SimError::config(
                    format!("{key}.noise_std"),
                    format!("needs {} entries", kind.dim()),
                ));
            }
            if spec.noise_std.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(SimError::config(format!("{key}.noise_std"), "entries must be >= 0"));
            }
            if !(spec.dropout >= 0.0 && spec.dropout < 1.0) {
                return Err(SimError::config(format!("{key}.dropout"), "must lie in [0, 1)"));
            }
            if let Some(r) = spec.max_range {
                positive(&format!("{key}.max_range"), r)?;
            }
        }
        finite_non_negative("sensors.observer_position_std", self.sensors.observer_position_std)?;
        finite_non_negative("sensors.observer_angle_std", self.sensors.observer_angle_std)?;
        self.estimator.bank()?;
        if let Some(p) = self.estimator.gate_probability {
            if !(p > 0.0 && p < 1.0) {
                return Err(SimError::config("estimator.gate_probability", "must lie in (0, 1)"));
            }
        }
        for (group, s) in [
            ("estimator.process_noise", &self.estimator.process_noise),
            ("estimator.initial_std", &self.estimator.initial_std),
        ] {
            for (name, v) in s.values() {
                finite_non_negative(&format!("{group}.{name}"), v)?;
            }
        }
        positive("uav.kp", self.uav.kp)?;
        finite_non_negative("uav.kd", self.uav.kd)?;
        positive("uav.max_accel", self.uav.max_accel)?;
        finite_non_negative("landing_task.start", self.landing_task.start)?;
        finite_non_negative("landing_task.retry_delay", self.landing_task.retry_delay)?;
        Ok(())
    }

    /// The wave bank the estimator actually uses under the configured variant.
    pub fn effective_bank(&self) -> Result<WaveBank<f64>> {
        if self.variant.wave_model() {
            self.estimator.bank()
        } else {
            Ok(WaveBank::empty())
        }
    }

    pub fn sensor_settings(&self, kind: SensorKind) -> SensorSettings<f64> {
        SensorSettings {
            noise_std: self.sensors.spec(kind).noise_std.clone(),
            gate_probability: self.estimator.gate_probability,
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be positive, got {v}")))
    }
}

fn finite_non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be finite and >= 0, got {v}")))
    }
}
