use usvwave_core::SensorKind;
use usvwave_sim::config::{ScenarioConfig, StateStd, Task, TruthMode, Variant};
use usvwave_sim::{run_scenario, RunLog};

fn linear(seconds: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        task: Task::EstimateOnly,
        duration: seconds,
        warmup: 0.0,
        ..ScenarioConfig::default()
    };
    cfg.truth.mode = TruthMode::Linear;
    cfg
}

fn noiseless(mut cfg: ScenarioConfig) -> ScenarioConfig {
    for kind in SensorKind::ALL {
        let spec = match kind {
            SensorKind::Gps => &mut cfg.sensors.gps,
            SensorKind::Imu => &mut cfg.sensors.imu,
            SensorKind::Uvdar => &mut cfg.sensors.uvdar,
            SensorKind::AprilTag => &mut cfg.sensors.apriltag,
        };
        spec.noise_std.iter_mut().for_each(|s| *s = 0.0);
    }
    cfg.sensors.observer_position_std = 0.0;
    cfg.sensors.observer_angle_std = 0.0;
    cfg.estimator.process_noise = StateStd::default();
    cfg.estimator.initial_std = StateStd::default();
    cfg
}

fn position_rmse(log: &RunLog) -> f64 {
    let rows: Vec<_> = log.rows.iter().filter(|r| r.est_t == r.t).collect();
    let mut sum = 0.0;
    for r in &rows {
        for i in 0..3 {
            sum += (r.est_pose[i] - r.truth_pose[i]).powi(2);
        }
    }
    (sum / (3 * rows.len()) as f64).sqrt()
}

#[test]
fn noiseless_linear_truth_is_tracked_and_predicted_exactly() {
    let cfg = noiseless(linear(6.0));
    let log = run_scenario(&cfg).unwrap();
    let mut worst: f64 = 0.0;
    for r in log.rows.iter().filter(|r| r.est_t == r.t) {
        for i in 0..6 {
            worst = worst.max((r.est_pose[i] - r.truth_pose[i]).abs());
            worst = worst.max((r.est_velocity[i] - r.truth_velocity[i]).abs());
        }
    }
    assert!(worst <= 1e-6, "estimate error {worst}");
    let dt = cfg.truth.dt;
    let mut checked = 0;
    for r in log.rows.iter().filter(|r| r.pred_t.is_finite()) {
        let k = (r.pred_t / dt).round() as usize;
        let Some(truth) = log.rows.get(k) else { continue };
        for i in 0..6 {
            assert!((r.pred_pose[i] - truth.truth_pose[i]).abs() <= 1e-6, "t={} i={i}", r.t);
        }
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn fusing_every_sensor_beats_gps_alone_on_every_seed() {
    for seed in 1..=10 {
        let base = ScenarioConfig {
            seed,
            ..linear(15.0)
        };
        let all = position_rmse(&run_scenario(&base).unwrap());
        let gps = position_rmse(
            &run_scenario(&ScenarioConfig {
                variant: Variant::GpsOnly,
                ..base.clone()
            })
            .unwrap(),
        );
        assert!(all < gps, "seed {seed}: {all} vs {gps}");
    }
}
