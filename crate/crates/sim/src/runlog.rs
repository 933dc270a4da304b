//! Per-tick run log and its CSV form.
//!
//! Schema `v1`: a `#` header line with run metadata, a column line, then one
//! row per simulation tick. Floats are written in shortest round-trip form, so
//! reading a log back reproduces every value bit for bit. Missing values
//! (no new prediction this tick, no planner, no contact) are `NaN`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use usvwave_core::planner::Phase;
use usvwave_core::SensorKind;

use crate::config::{Task, Variant};
use crate::error::{Result, SimError};

pub const RUNLOG_VERSION: &str = "usvwave-runlog v1";

const POSE: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];
const VEL: [&str; 6] = ["u", "v", "w", "p", "q", "r"];
const XYZ: [&str; 3] = ["x", "y", "z"];
const COUNTERS: [&str; 4] = ["accepted", "rejected", "late", "ignored"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunHeader {
    pub seed: u64,
    pub task: Task,
    pub variant: Variant,
    pub sim_dt: f64,
    pub warmup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    /// `None` when no planner runs.
    pub phase: Option<Phase>,
    /// World pose and body velocity of the USV.
    pub truth_pose: [f64; 6],
    pub truth_velocity: [f64; 6],
    /// Stamp of the belief, the last filter grid point not after `t`.
    pub est_t: f64,
    /// Estimated world pose and body velocity.
    pub est_pose: [f64; 6],
    pub est_velocity: [f64; 6],
    /// Stamp and world pose of the horizon end of a prediction made this tick.
    pub pred_t: f64,
    pub pred_pose: [f64; 6],
    pub uav_position: [f64; 3],
    pub uav_velocity: [f64; 3],
    /// Latest planner setpoint (first sample of the latest plan).
    pub sp_t: f64,
    pub sp_position: [f64; 3],
    pub sp_velocity: [f64; 3],
    /// Truth deck vertical speed in the world frame.
    pub deck_vz: f64,
    /// Cumulative `[accepted, rejected, late, ignored]` per sensor kind.
    pub counters: [[u64; 4]; 4],
    /// UAV minus deck vertical speed at truth contact, only on the contact row.
    pub contact_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub rows: Vec<LogRow>,
}

/// Column names of the CSV form, in order.
pub fn columns() -> Vec<String> {
    let mut c = vec!["t".to_string(), "phase".to_string()];
    let group = |c: &mut Vec<String>, prefix: &str, names: &[&str]| {
        c.extend(names.iter().map(|n| format!("{prefix}_{n}")));
    };
    group(&mut c, "truth", &POSE);
    group(&mut c, "truth", &VEL);
    c.push("est_t".into());
    group(&mut c, "est", &POSE);
    group(&mut c, "est", &VEL);
    c.push("pred_t".into());
    group(&mut c, "pred", &POSE);
    group(&mut c, "uav", &XYZ);
    group(&mut c, "uav_v", &XYZ);
    c.push("sp_t".into());
    group(&mut c, "sp", &XYZ);
    group(&mut c, "sp_v", &XYZ);
    c.push("deck_vz".into());
    for kind in SensorKind::ALL {
        group(&mut c, kind.name(), &COUNTERS);
    }
    c.push("contact_speed".into());
    c
}

impl RunLog {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    pub fn to_csv_string(&self) -> String {
        let h = &self.header;
        let mut s = format!(
            "# {RUNLOG_VERSION} seed={} task={} variant={} sim_dt={} warmup={}\n",
            h.seed,
            h.task.name(),
            h.variant.name(),
            h.sim_dt,
            h.warmup
        );
        s.push_str(&columns().join(","));
        s.push('\n');
        for r in &self.rows {
            write_row(&mut s, r);
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(SimError::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                }),
                None => Err(SimError::Parse {
                    line: 0,
                    reason: format!("missing {what}"),
                }),
            }
        };
        let (n, first) = next("header")?;
        let header = parse_header(&first).map_err(|reason| SimError::Parse { line: n, reason })?;
        let (n, cols) = next("column line")?;
        if cols != columns().join(",") {
            return Err(SimError::Parse {
                line: n,
                reason: "column line does not match schema v1".into(),
            });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| SimError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            if line.is_empty() {
                continue;
            }
            rows.push(parse_row(&line).map_err(|reason| SimError::Parse { line: i + 1, reason })?);
        }
        Ok(Self { header, rows })
    }
}

fn write_row(s: &mut String, r: &LogRow) {
    let phase = r.phase.map_or("none", |p| p.name());
    let _ = write!(s, "{},{}", r.t, phase);
    let mut f = |v: f64| {
        let _ = write!(s, ",{v}");
    };
    r.truth_pose.iter().for_each(|&v| f(v));
    r.truth_velocity.iter().for_each(|&v| f(v));
    f(r.est_t);
    r.est_pose.iter().for_each(|&v| f(v));
    r.est_velocity.iter().for_each(|&v| f(v));
    f(r.pred_t);
    r.pred_pose.iter().for_each(|&v| f(v));
    r.uav_position.iter().for_each(|&v| f(v));
    r.uav_velocity.iter().for_each(|&v| f(v));
    f(r.sp_t);
    r.sp_position.iter().for_each(|&v| f(v));
    r.sp_velocity.iter().for_each(|&v| f(v));
    f(r.deck_vz);
    for c in &r.counters {
        for v in c {
            let _ = write!(s, ",{v}");
        }
    }
    let _ = writeln!(s, ",{}", r.contact_speed);
}

fn parse_header(line: &str) -> std::result::Result<RunHeader, String> {
    let rest = line
        .strip_prefix("# ")
        .and_then(|l| l.strip_prefix(RUNLOG_VERSION))
        .ok_or_else(|| format!("expected `# {RUNLOG_VERSION}` header"))?;
    let mut seed = None;
    let mut task = None;
    let mut variant = None;
    let mut sim_dt = None;
    let mut warmup = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad header field `{kv}`"))?;
        let bad = |_| format!("bad value for `{k}`");
        match k {
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| format!("bad value for `{k}`"))?),
            "task" => {
                task = Some(match v {
                    "follow" => Task::Follow,
                    "land" => Task::Land,
                    "estimate-only" => Task::EstimateOnly,
                    _ => return Err(format!("unknown task `{v}`")),
                })
            }
            "variant" => variant = Some(v.parse::<Variant>().map_err(|e| e.to_string())?),
            "sim_dt" => sim_dt = Some(v.parse::<f64>().map_err(bad)?),
            "warmup" => warmup = Some(v.parse::<f64>().map_err(bad)?),
            _ => return Err(format!("unknown header field `{k}`")),
        }
    }
    Ok(RunHeader {
        seed: seed.ok_or("header lacks seed")?,
        task: task.ok_or("header lacks task")?,
        variant: variant.ok_or("header lacks variant")?,
        sim_dt: sim_dt.ok_or("header lacks sim_dt")?,
        warmup: warmup.ok_or("header lacks warmup")?,
    })
}

struct Fields<'a> {
    it: std::str::Split<'a, char>,
}

impl Fields<'_> {
    fn text(&mut self) -> &str {
        self.it.next().unwrap_or("")
    }

    fn float(&mut self) -> std::result::Result<f64, String> {
        let s = self.text();
        s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
    }

    fn array<const N: usize>(&mut self) -> std::result::Result<[f64; N], String> {
        let mut a = [0.0; N];
        for v in &mut a {
            *v = self.float()?;
        }
        Ok(a)
    }

    fn count(&mut self) -> std::result::Result<u64, String> {
        let s = self.text();
        s.parse::<u64>().map_err(|_| format!("`{s}` is not a counter"))
    }
}

fn parse_row(line: &str) -> std::result::Result<LogRow, String> {
    let expected = columns().len();
    let found = line.split(',').count();
    if found != expected {
        return Err(format!("expected {expected} fields, found {found}"));
    }
    let mut f = Fields { it: line.split(',') };
    let t = f.float()?;
    let phase = match f.text() {
        "none" => None,
        p => Some(p.parse::<Phase>().map_err(|e| e.to_string())?),
    };
    let truth_pose = f.array()?;
    let truth_velocity = f.array()?;
    let est_t = f.float()?;
    let est_pose = f.array()?;
    let est_velocity = f.array()?;
    let pred_t = f.float()?;
    let pred_pose = f.array()?;
    let uav_position = f.array()?;
    let uav_velocity = f.array()?;
    let sp_t = f.float()?;
    let sp_position = f.array()?;
    let sp_velocity = f.array()?;
    let deck_vz = f.float()?;
    let mut counters = [[0u64; 4]; 4];
    for c in &mut counters {
        for v in c.iter_mut() {
            *v = f.count()?;
        }
    }
    let contact_speed = f.float()?;
    Ok(LogRow {
        t,
        phase,
        truth_pose,
        truth_velocity,
        est_t,
        est_pose,
        est_velocity,
        pred_t,
        pred_pose,
        uav_position,
        uav_velocity,
        sp_t,
        sp_position,
        sp_velocity,
        deck_vz,
        counters,
        contact_speed,
    })
}
