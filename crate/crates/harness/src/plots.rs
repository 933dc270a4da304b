//! SVG line plots of truth, estimate and horizon-end prediction per pose state.

use std::path::{Path, PathBuf};

use plotters::prelude::*;
use usvwave_sim::RunLog;

use crate::error::{HarnessError, Result};

const STATES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];
const UNITS: [&str; 6] = ["m", "m", "m", "rad", "rad", "rad"];

type Series = Vec<(f64, f64)>;

fn series(log: &RunLog, state: usize) -> [Series; 3] {
    let mut truth = Vec::with_capacity(log.rows.len());
    let mut est = Vec::new();
    let mut pred = Vec::new();
    for r in &log.rows {
        truth.push((r.t, r.truth_pose[state]));
        if (r.est_t - r.t).abs() < 1e-9 {
            est.push((r.t, r.est_pose[state]));
        }
        if r.pred_t.is_finite() {
            pred.push((r.pred_t, r.pred_pose[state]));
        }
    }
    [truth, est, pred]
}

fn bounds(all: &[Series]) -> ((f64, f64), (f64, f64)) {
    let pts = all.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return ((0.0, 1.0), (-1.0, 1.0));
    }
    let pad = ((y1 - y0) * 0.05).max(1e-3);
    ((x0, x1.max(x0 + 1e-3)), (y0 - pad, y1 + pad))
}

fn draw(log: &RunLog, state: usize, path: &Path) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let root = SVGBackend::new(path, (900, 320)).into_drawing_area();
    root.fill(&WHITE)?;
    let data = series(log, state);
    let ((x0, x1), (y0, y1)) = bounds(&data);
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{} [{}]", STATES[state], UNITS[state]), ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(30)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, y0..y1)?;
    chart.configure_mesh().x_desc("t [s]").draw()?;
    let styles = [("truth", BLACK), ("estimate", BLUE), ("prediction", RED)];
    for (points, (label, color)) in data.into_iter().zip(styles) {
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(1)))?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Writes `<state>.svg` for each pose state into `dir`.
pub fn write_pose_plots(log: &RunLog, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for (i, name) in STATES.iter().enumerate() {
        let path = dir.join(format!("{name}.svg"));
        draw(log, i, &path).map_err(|e| HarnessError::Plot {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        files.push(path);
    }
    Ok(files)
}
