//! Linear Kalman filter over the discrete wave-augmented model.

mod belief;
mod filter;
mod schedule;
mod sensor;

pub use belief::VesselBelief;
pub use filter::{correct_step, predict_step, Correction, ProcessNoise, ProcessNoiseStd};
pub use schedule::{process_in_order, Estimator, SensorCounters};
pub use sensor::{
    sensor_model_for, transform_measurement, Measurement, MeasurementFrame, SensorKind, SensorModel, SensorSettings,
};
