#![allow(dead_code)]

use nalgebra::DMatrix;
use usvwave_core::{RigidBodyParams, WaveBank, WaveComponentParams};

/// Default-scenario vessel parameters.
pub fn vessel() -> RigidBodyParams<f64> {
    RigidBodyParams::diagonal(
        [180.0, 180.0, 180.0, 30.0, 60.0, 80.0],
        [20.0, 60.0, 90.0, 10.0, 20.0, 20.0],
        [70.0, 100.0, 300.0, 40.0, 80.0, 100.0],
        [0.0, 0.0, 2000.0, 300.0, 600.0, 0.0],
    )
}

pub fn bank(components: &[(f64, f64)]) -> WaveBank<f64> {
    WaveBank::new(
        components
            .iter()
            .map(|&(w, l)| WaveComponentParams::new(w, l).unwrap())
            .collect(),
    )
    .unwrap()
}

/// `exp(A dt)` as `n` sequential products of a truncated series over `dt / n`.
pub fn composed_series(a: &DMatrix<f64>, dt: f64, n: usize, terms: usize) -> DMatrix<f64> {
    let h = a * (dt / n as f64);
    let dim = a.nrows();
    let mut step = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for k in 1..=terms {
        term = &term * &h / k as f64;
        step += &term;
    }
    let mut out = DMatrix::identity(dim, dim);
    for _ in 0..n {
        out = &step * out;
    }
    out
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
