//! Exact zero-order discretization of the homogeneous model, `A_d = exp(A dt)`.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::model::ContinuousModel;
use crate::real::{lit, to_f64, Real};

/// Norm bound the scaled matrix must satisfy before the Taylor series is summed.
const SCALED_NORM: f64 = 0.5;
/// Taylor terms after scaling. 0.5^20 / 20! is far below f64 resolution.
const TAYLOR_TERMS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel<T: Real> {
    a: DMatrix<T>,
    dt: T,
    n_c: usize,
}

impl<T: Real> DiscreteModel<T> {
    /// Wraps a precomputed transition matrix.
    pub fn from_parts(a: DMatrix<T>, dt: T, n_c: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(invalid(format!("discretization step must be > 0, got {}", to_f64(dt))));
        }
        if !a.is_square() {
            return Err(invalid("transition matrix must be square"));
        }
        Ok(Self { a, dt, n_c })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Discretizes `model` with step `dt` through the matrix exponential.
pub fn discretize<T: Real>(model: &ContinuousModel<T>, dt: T) -> Result<DiscreteModel<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(invalid(format!("discretization step must be > 0, got {}", to_f64(dt))));
    }
    let a = expm(&(model.matrix() * dt));
    DiscreteModel::from_parts(a, dt, model.n_c())
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = inf_norm(a);
    let mut squarings = 0u32;
    let half = lit::<T>(SCALED_NORM);
    let mut scale = T::one();
    while norm * scale > half {
        scale *= lit::<T>(0.5);
        squarings += 1;
    }
    let scaled = a * scale;

    // Horner form: I + X (I + X/2 (I + X/3 (...)))
    let identity = DMatrix::<T>::identity(n, n);
    let mut acc = identity.clone();
    for k in (1..=TAYLOR_TERMS).rev() {
        acc = &identity + (&scaled * acc) * (T::one() / lit::<T>(k as f64));
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

fn inf_norm<T: Real>(a: &DMatrix<T>) -> T {
    a.row_iter()
        .map(|row| row.iter().fold(T::zero(), |s, x| s + x.abs()))
        .fold(T::zero(), |m, x| m.max(x))
}
