//! Wave-augmented 6-DOF USV model with a linear Kalman estimator, an N-step
//! state predictor and a receding-horizon landing planner for a UAV.
//!
//! The model, estimator and predictor are generic over the scalar type
//! ([`Real`], implemented for `f32` and `f64`). The `*64` aliases below fix
//! the scalar to `f64`, which is what the simulator and planner use.

pub mod discrete;
pub mod error;
pub mod estimation;
pub mod frames;
pub mod model;
pub mod planner;
pub mod prediction;
pub mod real;

pub use discrete::{discretize, expm, DiscreteModel};
pub use error::{CoreError, Result};
pub use estimation::{
    correct_step, predict_step, process_in_order, sensor_model_for, transform_measurement, Correction, Estimator,
    Measurement, MeasurementFrame, ProcessNoise, ProcessNoiseStd, SensorCounters, SensorKind, SensorModel,
    SensorSettings, VesselBelief,
};
pub use frames::{BodyVelocity, EulerPose};
pub use model::{assemble_usv_model, state_dim, ContinuousModel, RigidBodyParams, WaveBank, WaveComponentParams};
pub use prediction::{pose_at, predict_horizon, predict_mean_horizon, PredictionHorizon};
pub use real::{wrap_angle, Real};

pub type ContinuousModel64 = ContinuousModel<f64>;
pub type DiscreteModel64 = DiscreteModel<f64>;
pub type VesselBelief64 = VesselBelief<f64>;
pub type Measurement64 = Measurement<f64>;
pub type SensorModel64 = SensorModel<f64>;
pub type ProcessNoise64 = ProcessNoise<f64>;
pub type Estimator64 = Estimator<f64>;
pub type PredictionHorizon64 = PredictionHorizon<f64>;
pub type EulerPose64 = EulerPose<f64>;
pub type RigidBodyParams64 = RigidBodyParams<f64>;
pub type WaveBank64 = WaveBank<f64>;
