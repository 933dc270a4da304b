use std::path::{Path, PathBuf};

use usvwave_sim::{run_scenario, RunLog, ScenarioConfig};

use crate::config::{load_config, Override};
use crate::error::{HarnessError, Result};
use crate::metrics::{compute_metrics, MetricsReport};
use crate::plots;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub log: RunLog,
    pub metrics: MetricsReport,
    /// Every file written, log and metrics first.
    pub files: Vec<PathBuf>,
}

/// Runs a validated scenario and scores it.
pub fn execute(cfg: &ScenarioConfig) -> Result<(RunLog, MetricsReport)> {
    let log = run_scenario(cfg)?;
    let metrics = compute_metrics(&log, cfg.planner.landing.contact_speed_bound)?;
    Ok((log, metrics))
}

/// Loads `config` with `overrides`, runs it and writes `log.csv`,
/// `metrics.csv` and, with `plots`, SVG figures into `out`.
pub fn run(config: &Path, overrides: &[Override], out: &Path, plots: bool) -> Result<RunOutput> {
    let cfg = load_config(config, overrides)?;
    let (log, metrics) = execute(&cfg)?;
    std::fs::create_dir_all(out).map_err(HarnessError::io(out))?;
    let log_path = out.join("log.csv");
    log.save(&log_path)?;
    let metrics_path = out.join("metrics.csv");
    metrics.save(&metrics_path)?;
    let mut files = vec![log_path, metrics_path];
    if plots {
        files.extend(plots::write_pose_plots(&log, out)?);
    }
    Ok(RunOutput {
        config: cfg,
        log,
        metrics,
        files,
    })
}
