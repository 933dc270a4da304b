//! Monte Carlo filter consistency on truth drawn from the filter's own model.
//!
//! Truth follows `x <- A_d x + w`, `w ~ N(0, Q)`, from `x0 ~ N(m0, P0)`, and
//! measurements are `C x + v` with the filter's `R`, already expressed in the
//! vessel-parallel frame. Gating is off. The normalized estimation error
//! squared, averaged over runs and then over time, is compared with the 95%
//! chi-square band for `runs * n` degrees of freedom scaled by `1 / runs`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use usvwave_core::model::state_dim;
use usvwave_core::{
    assemble_usv_model, discretize, sensor_model_for, wrap_angle, Estimator64, Measurement64, MeasurementFrame,
    ProcessNoise, SensorSettings, VesselBelief,
};

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};
use crate::sensors::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct NeesReport {
    pub runs: usize,
    pub steps: usize,
    pub dim: usize,
    /// Run-averaged NEES per filter step.
    pub per_step: Vec<f64>,
    /// Time average of `per_step`.
    pub average: f64,
    pub band: (f64, f64),
}

impl NeesReport {
    pub fn within_band(&self) -> bool {
        self.average >= self.band.0 && self.average <= self.band.1
    }

    /// Share of steps whose run-averaged NEES lies in the band.
    pub fn fraction_in_band(&self) -> f64 {
        let n = self.per_step.iter().filter(|v| **v >= self.band.0 && **v <= self.band.1).count();
        n as f64 / self.per_step.len().max(1) as f64
    }
}

/// 95% band for the average of `runs` independent chi-square(`dim`) draws.
pub fn nees_band(runs: usize, dim: usize) -> (f64, f64) {
    let dof = (runs * dim) as f64;
    let chi2 = ChiSquared::new(dof).expect("positive degrees of freedom");
    (chi2.inverse_cdf(0.025) / runs as f64, chi2.inverse_cdf(0.975) / runs as f64)
}

fn gaussian(rng: &mut impl Rng, std: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(std.len(), |i, _| std[i] * rng.sample::<f64, _>(StandardNormal))
}

fn wrap_orientation(x: &mut DVector<f64>) {
    for i in 3..6 {
        x[i] = wrap_angle(x[i]);
    }
}

/// Runs the experiment with the estimator settings of `cfg`.
///
/// GPS, IMU and AprilTag report at their configured rates, rounded to whole
/// filter steps. The fused sensors follow `cfg.variant`; process noise is
/// `cfg.estimator.process_noise`, the prior is `cfg.estimator.initial_std`.
pub fn nees_experiment(cfg: &ScenarioConfig, runs: usize, steps: usize) -> Result<NeesReport> {
    if runs == 0 || steps == 0 {
        return Err(SimError::config("nees", "runs and steps must be positive"));
    }
    cfg.validate()?;
    let bank = cfg.effective_bank()?;
    let n_c = bank.len();
    let n = state_dim(n_c);
    let dt = cfg.estimator.dt;
    let model = assemble_usv_model(&cfg.vessel.rigid(), &bank).map_err(|e| SimError::config("vessel", e.to_string()))?;
    let discrete = discretize(&model, dt).map_err(|e| SimError::config("estimator.dt", e.to_string()))?;
    let q = ProcessNoise::diagonal(n_c, &cfg.estimator.process_noise.to_core());
    let q_std = q.q.diagonal().map(f64::sqrt);

    let init = &cfg.estimator.initial_std;
    let mut p0 = ProcessNoise::diagonal(n_c, &init.to_core()).q.diagonal();
    for v in p0.iter_mut().skip(12) {
        *v = init.wave * init.wave;
    }
    let p0_std = p0.map(f64::sqrt);

    let fused = cfg.variant.fused();
    let mut models = Vec::new();
    for &kind in &fused {
        let settings = SensorSettings {
            gate_probability: None,
            ..cfg.sensor_settings(kind)
        };
        models.push(sensor_model_for(kind, &settings, n_c).map_err(SimError::core(0.0))?);
    }
    let every: Vec<usize> = fused
        .iter()
        .map(|&k| ((1.0 / (cfg.sensors.spec(k).rate * dt)).round() as usize).max(1))
        .collect();

    let band = nees_band(runs, n);
    let mut per_step = vec![0.0; steps];
    for run in 0..runs {
        let mut rng = stream(cfg.seed.wrapping_add(run as u64), 0);
        let mean0 = DVector::zeros(n);
        let mut x = &mean0 + gaussian(&mut rng, &p0_std);
        wrap_orientation(&mut x);
        let belief = VesselBelief::with_diagonal(mean0, &p0, 0.0).map_err(SimError::core(0.0))?;
        let mut est = Estimator64::new(discrete.clone(), q.clone(), models.clone(), belief).map_err(SimError::core(0.0))?;
        for (k, slot) in per_step.iter_mut().enumerate() {
            let t = (k + 1) as f64 * dt;
            x = discrete.matrix() * &x + gaussian(&mut rng, &q_std);
            wrap_orientation(&mut x);
            for (sm, &ev) in models.iter().zip(&every) {
                if (k + 1) % ev != 0 {
                    continue;
                }
                let r_std = DVector::from_iterator(sm.dim(), sm.base_noise.diagonal().iter().map(|v| v.sqrt()));
                let mut y = &sm.c * &x + gaussian(&mut rng, &r_std);
                for (i, angular) in sm.angular_rows.iter().enumerate() {
                    if *angular {
                        y[i] = wrap_angle(y[i]);
                    }
                }
                est.push(Measurement64 {
                    stamp: t,
                    kind: sm.kind,
                    value: y,
                    noise: sm.base_noise.clone(),
                    observer_pose: None,
                    frame: MeasurementFrame::VesselParallel,
                });
            }
            est.advance_to(t).map_err(SimError::core(t))?;
            let b = est.belief();
            let mut e = &x - &b.mean;
            wrap_orientation(&mut e);
            let chol = b.covariance.clone().cholesky().ok_or_else(|| SimError::Core {
                t,
                source: usvwave_core::CoreError::InvalidArgument("covariance lost positive definiteness".into()),
            })?;
            *slot += e.dot(&chol.solve(&e)) / runs as f64;
        }
    }
    let average = per_step.iter().sum::<f64>() / steps as f64;
    Ok(NeesReport {
        runs,
        steps,
        dim: n,
        per_step,
        average,
        band,
    })
}
