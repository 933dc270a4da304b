//! Paired-seed comparison of scenario variants.
//!
//! Every configuration runs on seeds `base, base + 1, ...`, where `base` is the
//! seed of the first configuration, so column `i` of every row shares truth
//! and sensor noise streams.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use usvwave_sim::ScenarioConfig;

use crate::error::{HarnessError, Result};
use crate::metrics::MetricsReport;
use crate::run::execute;

pub const COMPARE_VERSION: &str = "usvwave-compare v1";

/// Metric columns of the comparison table.
pub const COLUMNS: [&str; 6] = [
    "est_position",
    "est_orientation",
    "est_linear_velocity",
    "est_angular_velocity",
    "pred_position",
    "pred_orientation",
];

fn column(m: &MetricsReport, i: usize) -> f64 {
    match i {
        0 => m.est_position,
        1 => m.est_orientation,
        2 => m.est_linear_velocity,
        3 => m.est_angular_velocity,
        4 => m.pred_position.unwrap_or(f64::NAN),
        5 => m.pred_orientation.unwrap_or(f64::NAN),
        _ => unreachable!("six columns"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    /// Metrics per seed, in seed order.
    pub per_seed: Vec<MetricsReport>,
    /// Mean and sample standard deviation per entry of [`COLUMNS`].
    pub mean: [f64; 6],
    pub std: [f64; 6],
}

impl ComparisonRow {
    fn new(label: String, per_seed: Vec<MetricsReport>) -> Self {
        let n = per_seed.len() as f64;
        let mean = std::array::from_fn(|i| per_seed.iter().map(|m| column(m, i)).sum::<f64>() / n);
        let std = std::array::from_fn(|i| {
            if per_seed.len() < 2 {
                return 0.0;
            }
            let ss: f64 = per_seed.iter().map(|m| (column(m, i) - mean[i]).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        });
        Self {
            label,
            per_seed,
            mean,
            std,
        }
    }

    /// Values of one column across seeds.
    pub fn values(&self, col: usize) -> Vec<f64> {
        self.per_seed.iter().map(|m| column(m, col)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
}

/// Runs each labelled configuration on `seeds` paired seeds.
pub fn compare(configs: &[(String, ScenarioConfig)], seeds: usize) -> Result<ComparisonTable> {
    if configs.len() < 2 {
        return Err(HarnessError::InvalidArgument(format!(
            "compare needs at least two configurations, got {}",
            configs.len()
        )));
    }
    if seeds == 0 {
        return Err(HarnessError::InvalidArgument("compare needs at least one seed".into()));
    }
    let base = configs[0].1.seed;
    let seed_list: Vec<u64> = (0..seeds as u64).map(|i| base.wrapping_add(i)).collect();
    let jobs: Vec<(usize, u64)> = (0..configs.len()).flat_map(|c| seed_list.iter().map(move |&s| (c, s))).collect();
    let results: Vec<Result<MetricsReport>> = jobs
        .par_iter()
        .map(|&(c, seed)| {
            let mut cfg = configs[c].1.clone();
            cfg.seed = seed;
            execute(&cfg).map(|(_, m)| m)
        })
        .collect();
    let mut results = results.into_iter();
    let mut rows = Vec::with_capacity(configs.len());
    for (label, _) in configs {
        let per_seed = results.by_ref().take(seeds).collect::<Result<Vec<_>>>()?;
        rows.push(ComparisonRow::new(label.clone(), per_seed));
    }
    Ok(ComparisonTable { seeds: seed_list, rows })
}

impl ComparisonTable {
    /// Fixed-width `mean ± std` table.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(7);
        let mut s = format!("{:width$}", "variant");
        for c in COLUMNS {
            write!(s, "  {c:>22}").unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{:width$}", r.label).unwrap();
            for i in 0..COLUMNS.len() {
                let cell = format!("{:.4} ± {:.4}", r.mean[i], r.std[i]);
                write!(s, "  {cell:>22}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// One line per configuration with mean and std columns.
    pub fn to_csv_string(&self) -> String {
        let mut s = format!("# {COMPARE_VERSION} seeds={}\nlabel", self.seeds.len());
        for c in COLUMNS {
            write!(s, ",{c}_mean,{c}_std").unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.label);
            for i in 0..COLUMNS.len() {
                write!(s, ",{},{}", r.mean[i], r.std[i]).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(HarnessError::io(path))
    }
}
