//! Deterministic desk-scale world for the USV estimator and UAV planner:
//! nonlinear truth, synthetic sensors, a point-mass UAV and the closed loop
//! that ties them to the core crate, with per-tick CSV logs.

pub mod config;
pub mod consistency;
pub mod error;
pub mod runlog;
pub mod scenario;
pub mod sensors;
pub mod truth;
pub mod uav;

pub use config::{ScenarioConfig, Task, TruthMode, Variant};
pub use consistency::{nees_experiment, NeesReport};
pub use error::{Result, SimError};
pub use runlog::{LogRow, RunHeader, RunLog};
pub use scenario::{build_estimator, run_scenario};
pub use sensors::{emit_measurements, SensorSuite};
pub use truth::{step_truth, TruthModel, TruthState};
pub use uav::{UavCommand, UavPlant};
