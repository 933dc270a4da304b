//! Scenario files, metrics, comparisons and plots around `usvwave-sim` runs.

pub mod compare;
pub mod config;
pub mod error;
pub mod metrics;
pub mod plots;
pub mod run;

pub use compare::{compare, ComparisonRow, ComparisonTable};
pub use config::{load_config, parse_config, Override};
pub use error::{HarnessError, Result};
pub use metrics::{compute_metrics, rmse, LandingOutcome, MetricsReport};
pub use run::{run, RunOutput};
