//! RMSE groups and landing outcome computed from a [`RunLog`].
//!
//! Estimates are scored on rows at or after the warmup whose belief stamp is
//! the row time. A prediction issued at `t >= warmup` is scored against the
//! truth row at its horizon end, when the log reaches that far.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use usvwave_core::planner::Phase;
use usvwave_core::wrap_angle;
use usvwave_sim::{LogRow, RunLog, Task};

use crate::error::{HarnessError, Result};

pub const METRICS_VERSION: &str = "usvwave-metrics v1";

/// Stamps closer than this are the same grid point.
const STAMP_TOL: f64 = 1e-9;

/// Relative contact speed above which a touchdown counts as hard.
pub const HARD_CONTACT_SPEED: f64 = 0.5;

/// Pooled RMSE of a series of error vectors.
///
/// With `angular` each component is wrapped to (-pi, pi] before squaring.
pub fn rmse<const N: usize>(errors: &[[f64; N]], angular: bool) -> Result<f64> {
    if errors.is_empty() || N == 0 {
        return Err(HarnessError::InvalidArgument("rmse of an empty series".into()));
    }
    let mut sum = 0.0;
    for e in errors {
        for &v in e {
            let v = if angular { wrap_angle(v) } else { v };
            sum += v * v;
        }
    }
    Ok((sum / (errors.len() * N) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandingOutcome {
    /// Contact happened while the planner was in Touchdown.
    pub reached_touchdown: bool,
    /// Touchdown contact with relative speed within the bound.
    pub success: bool,
    /// Magnitude of UAV minus deck vertical speed at contact, NaN without contact.
    pub touchdown_speed: f64,
    pub aborts: u64,
    /// Contact outside Touchdown.
    pub crash: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub est_samples: usize,
    pub est_position: f64,
    pub est_orientation: f64,
    pub est_linear_velocity: f64,
    pub est_angular_velocity: f64,
    pub pred_samples: usize,
    /// `None` when no prediction could be matched with truth.
    pub pred_position: Option<f64>,
    pub pred_orientation: Option<f64>,
    /// `None` unless the task is a landing.
    pub landing: Option<LandingOutcome>,
}

fn diff<const N: usize>(a: &[f64], b: &[f64]) -> [f64; N] {
    std::array::from_fn(|i| a[i] - b[i])
}

fn landing_outcome(rows: &[LogRow], bound: f64) -> LandingOutcome {
    let mut aborts = 0;
    let mut prev = None;
    for r in rows {
        if r.phase == Some(Phase::Aborted) && prev != Some(Phase::Aborted) {
            aborts += 1;
        }
        prev = r.phase;
    }
    let contact = rows.last().filter(|r| r.contact_speed.is_finite());
    let (reached_touchdown, touchdown_speed, crash) = match contact {
        Some(r) => {
            let td = r.phase == Some(Phase::Touchdown);
            (td, r.contact_speed.abs(), !td)
        }
        None => (false, f64::NAN, false),
    };
    LandingOutcome {
        reached_touchdown,
        success: reached_touchdown && touchdown_speed <= bound,
        touchdown_speed,
        aborts,
        crash,
    }
}

/// Scores `log`; `contact_speed_bound` decides landing success.
pub fn compute_metrics(log: &RunLog, contact_speed_bound: f64) -> Result<MetricsReport> {
    let warmup = log.header.warmup;
    let dt = log.header.sim_dt;
    let scored: Vec<&LogRow> = log
        .rows
        .iter()
        .filter(|r| r.t >= warmup - STAMP_TOL && (r.est_t - r.t).abs() < STAMP_TOL)
        .collect();
    let pos: Vec<[f64; 3]> = scored.iter().map(|r| diff(&r.est_pose[..3], &r.truth_pose[..3])).collect();
    let ori: Vec<[f64; 3]> = scored.iter().map(|r| diff(&r.est_pose[3..], &r.truth_pose[3..])).collect();
    let lin: Vec<[f64; 3]> = scored.iter().map(|r| diff(&r.est_velocity[..3], &r.truth_velocity[..3])).collect();
    let ang: Vec<[f64; 3]> = scored.iter().map(|r| diff(&r.est_velocity[3..], &r.truth_velocity[3..])).collect();
    let no_samples = |e: HarnessError| match e {
        HarnessError::InvalidArgument(_) => {
            HarnessError::InvalidArgument(format!("no estimate samples after warmup {warmup} s"))
        }
        other => other,
    };

    let mut pred_pos: Vec<[f64; 3]> = Vec::new();
    let mut pred_ori: Vec<[f64; 3]> = Vec::new();
    for r in &log.rows {
        if r.t < warmup - STAMP_TOL || !r.pred_t.is_finite() {
            continue;
        }
        let k = (r.pred_t / dt).round();
        let Some(truth) = log.rows.get(k as usize).filter(|row| (row.t - r.pred_t).abs() < STAMP_TOL) else {
            continue;
        };
        pred_pos.push(diff(&r.pred_pose[..3], &truth.truth_pose[..3]));
        pred_ori.push(diff(&r.pred_pose[3..], &truth.truth_pose[3..]));
    }

    Ok(MetricsReport {
        est_samples: scored.len(),
        est_position: rmse(&pos, false).map_err(no_samples)?,
        est_orientation: rmse(&ori, true).map_err(no_samples)?,
        est_linear_velocity: rmse(&lin, false).map_err(no_samples)?,
        est_angular_velocity: rmse(&ang, false).map_err(no_samples)?,
        pred_samples: pred_pos.len(),
        pred_position: rmse(&pred_pos, false).ok(),
        pred_orientation: rmse(&pred_ori, true).ok(),
        landing: (log.header.task == Task::Land).then(|| landing_outcome(&log.rows, contact_speed_bound)),
    })
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn some(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

impl MetricsReport {
    /// `name,value` lines under a versioned header. Floats use the shortest
    /// round-trip form; absent values are `NaN`.
    pub fn to_csv_string(&self) -> String {
        let mut s = format!("# {METRICS_VERSION}\nmetric,value\n");
        let mut put = |k: &str, v: &dyn std::fmt::Debug| writeln!(s, "{k},{v:?}").expect("write to String");
        put("est_samples", &self.est_samples);
        put("est_position", &self.est_position);
        put("est_orientation", &self.est_orientation);
        put("est_linear_velocity", &self.est_linear_velocity);
        put("est_angular_velocity", &self.est_angular_velocity);
        put("pred_samples", &self.pred_samples);
        put("pred_position", &opt(self.pred_position));
        put("pred_orientation", &opt(self.pred_orientation));
        if let Some(l) = &self.landing {
            put("landing_reached_touchdown", &l.reached_touchdown);
            put("landing_success", &l.success);
            put("landing_touchdown_speed", &l.touchdown_speed);
            put("landing_aborts", &l.aborts);
            put("landing_crash", &l.crash);
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(HarnessError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(HarnessError::io(path))?;
        Self::read_csv(std::io::BufReader::new(file)).map_err(|e| match e {
            HarnessError::InvalidArgument(reason) => HarnessError::InvalidArgument(format!("{}: {reason}", path.display())),
            other => other,
        })
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut fields = Fields::default();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| bad(i + 1, e.to_string()))?;
            match i {
                0 if line != format!("# {METRICS_VERSION}") => return Err(bad(1, format!("expected `# {METRICS_VERSION}`"))),
                1 if line != "metric,value" => return Err(bad(2, "expected `metric,value`".into())),
                0 | 1 => {}
                _ => {
                    let (k, v) = line.split_once(',').ok_or_else(|| bad(i + 1, "expected name,value".into()))?;
                    fields.0.insert(k.to_string(), (i + 1, v.to_string()));
                }
            }
        }
        let landing = if fields.0.contains_key("landing_touchdown_speed") {
            Some(LandingOutcome {
                reached_touchdown: fields.get("landing_reached_touchdown")?,
                success: fields.get("landing_success")?,
                touchdown_speed: fields.get("landing_touchdown_speed")?,
                aborts: fields.get("landing_aborts")?,
                crash: fields.get("landing_crash")?,
            })
        } else {
            None
        };
        let report = Self {
            est_samples: fields.get("est_samples")?,
            est_position: fields.get("est_position")?,
            est_orientation: fields.get("est_orientation")?,
            est_linear_velocity: fields.get("est_linear_velocity")?,
            est_angular_velocity: fields.get("est_angular_velocity")?,
            pred_samples: fields.get("pred_samples")?,
            pred_position: some(fields.get("pred_position")?),
            pred_orientation: some(fields.get("pred_orientation")?),
            landing,
        };
        if let Some((k, (line, _))) = fields.0.iter().next() {
            return Err(bad(*line, format!("unknown metric `{k}`")));
        }
        Ok(report)
    }
}

fn bad(line: usize, reason: String) -> HarnessError {
    HarnessError::InvalidArgument(format!("metrics line {line}: {reason}"))
}

#[derive(Default)]
struct Fields(std::collections::BTreeMap<String, (usize, String)>);

impl Fields {
    fn get<T: std::str::FromStr>(&mut self, k: &str) -> Result<T> {
        let (line, v) = self
            .0
            .remove(k)
            .ok_or_else(|| HarnessError::InvalidArgument(format!("metrics: missing `{k}`")))?;
        v.parse().map_err(|_| bad(line, format!("cannot parse `{v}` for `{k}`")))
    }
}
