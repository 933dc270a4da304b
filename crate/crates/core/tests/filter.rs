mod common;

use common::vessel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use usvwave_core::{
    assemble_usv_model, correct_step, discretize, predict_step, sensor_model_for, Measurement, MeasurementFrame,
    ProcessNoise, ProcessNoiseStd, SensorKind, SensorSettings, VesselBelief, WaveBank,
};

fn settings(kind: SensorKind, std: f64) -> SensorSettings<f64> {
    SensorSettings {
        noise_std: vec![std; kind.dim()],
        gate_probability: None,
    }
}

fn vp(stamp: f64, kind: SensorKind, value: DVector<f64>, std: f64) -> Measurement<f64> {
    let dim = kind.dim();
    Measurement {
        stamp,
        kind,
        value,
        noise: DMatrix::identity(dim, dim) * (std * std),
        observer_pose: None,
        frame: MeasurementFrame::VesselParallel,
    }
}

fn min_eigenvalue(p: &DMatrix<f64>) -> f64 {
    p.clone().symmetric_eigen().eigenvalues.min()
}

#[test]
fn covariance_stays_symmetric_psd_over_many_cycles() {
    let model = assemble_usv_model(&vessel(), &WaveBank::empty()).unwrap();
    let d = discretize(&model, 0.01).unwrap();
    let q = ProcessNoise::diagonal(
        0,
        &ProcessNoiseStd {
            position: 1e-3,
            orientation: 1e-3,
            linear_velocity: 1e-2,
            angular_velocity: 1e-2,
            wave: 0.0,
        },
    );
    let kinds = SensorKind::ALL;
    let models: Vec<_> = kinds.iter().map(|&k| sensor_model_for(k, &settings(k, 0.1), 0).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut b = VesselBelief::with_diagonal(DVector::zeros(12), &DVector::repeat(12, 0.5), 0.0).unwrap();
    for cycle in 0..100_000 {
        b = predict_step(&b, &d, &q);
        let i = rng.random_range(0..kinds.len());
        let kind = kinds[i];
        let value = DVector::from_fn(kind.dim(), |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal));
        let std = 10f64.powf(rng.random_range(-3.0..0.5));
        let out = correct_step(&b, &vp(b.stamp, kind, value, std), &models[i]).unwrap();
        assert!(out.accepted);
        b = out.belief;
        if cycle % 997 == 0 {
            let p = &b.covariance;
            assert_eq!(p, &p.transpose(), "cycle {cycle}");
            assert!(min_eigenvalue(p) >= -1e-12 * p.trace(), "cycle {cycle}");
        }
    }
}

#[test]
fn corrections_never_increase_the_trace() {
    let model = assemble_usv_model(&vessel(), &common::bank(&[(1.0, 0.05), (1.7, 0.05)])).unwrap();
    let d = discretize(&model, 0.01).unwrap();
    let q = ProcessNoise::diagonal(
        2,
        &ProcessNoiseStd {
            position: 1e-3,
            orientation: 1e-3,
            linear_velocity: 1e-2,
            angular_velocity: 1e-2,
            wave: 2e-2,
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut b = VesselBelief::with_diagonal(DVector::zeros(36), &DVector::repeat(36, 0.2), 0.0).unwrap();
    for _ in 0..2000 {
        b = predict_step(&b, &d, &q);
        let kind = SensorKind::ALL[rng.random_range(0..4)];
        let sm = sensor_model_for(kind, &settings(kind, 0.05), 2).unwrap();
        let value = DVector::from_fn(kind.dim(), |_, _| 0.05 * rng.sample::<f64, _>(StandardNormal));
        let before = b.covariance.trace();
        b = correct_step(&b, &vp(b.stamp, kind, value, 0.05), &sm).unwrap().belief;
        assert!(b.covariance.trace() <= before + 1e-12);
    }
}

#[test]
fn same_stamp_gps_and_imu_commute() {
    let model = assemble_usv_model(&vessel(), &common::bank(&[(1.0, 0.05), (1.7, 0.05)])).unwrap();
    let d = discretize(&model, 0.01).unwrap();
    let q = ProcessNoise::diagonal(
        2,
        &ProcessNoiseStd {
            position: 1e-2,
            orientation: 1e-2,
            linear_velocity: 1e-2,
            angular_velocity: 1e-2,
            wave: 1e-2,
        },
    );
    let gps = sensor_model_for(SensorKind::Gps, &settings(SensorKind::Gps, 0.5), 2).unwrap();
    let imu = sensor_model_for(SensorKind::Imu, &settings(SensorKind::Imu, 0.02), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..20 {
        let mean = DVector::from_fn(36, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal));
        let mut b = VesselBelief::with_diagonal(mean, &DVector::repeat(36, 0.3), 0.0).unwrap();
        for _ in 0..=trial {
            b = predict_step(&b, &d, &q);
        }
        let g = vp(b.stamp, SensorKind::Gps, DVector::from_fn(3, |_, _| rng.sample(StandardNormal)), 0.5);
        let i = vp(
            b.stamp,
            SensorKind::Imu,
            DVector::from_fn(6, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal)),
            0.02,
        );
        let gi = correct_step(&correct_step(&b, &g, &gps).unwrap().belief, &i, &imu).unwrap().belief;
        let ig = correct_step(&correct_step(&b, &i, &imu).unwrap().belief, &g, &gps).unwrap().belief;
        assert!((&gi.mean - &ig.mean).amax() < 1e-8);
        assert!((&gi.covariance - &ig.covariance).amax() < 1e-8);
    }
}
