use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use usvwave_sim::config::{Channel, ForcingSegment, ScenarioConfig, TruthWave};
use usvwave_sim::{step_truth, SimError, TruthModel, TruthState};

fn calm() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.truth.waves.clear();
    cfg.truth.forcing.clear();
    cfg
}

fn simulate(cfg: &ScenarioConfig, seconds: f64, mut visit: impl FnMut(&TruthState)) -> TruthState {
    let model = TruthModel::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut s = model.initial_state(cfg, &mut rng);
    let dt = cfg.truth.dt;
    let n = (seconds / dt).round() as u64;
    for k in 0..n {
        s = step_truth(&model, &s, dt).unwrap();
        s.clock = (k + 1) as f64 * dt;
        visit(&s);
    }
    s
}

#[test]
fn no_waves_no_forcing_stays_put() {
    let s = simulate(&calm(), 20.0, |_| {});
    assert!(s.eta.iter().chain(s.nu.iter()).all(|v| *v == 0.0));
}

#[test]
fn constant_thrust_settles_at_thrust_over_damping() {
    let mut cfg = calm();
    let thrust = 10.0;
    cfg.truth.forcing.push(ForcingSegment {
        start: 0.0,
        surge_thrust: thrust,
        yaw_rate: 0.0,
    });
    let d = cfg.vessel.damping[0];
    let m = cfg.vessel.inertia[0] + cfg.vessel.added_mass[0];
    // scalar first-order ODE m u' = T - d u from rest
    let oracle = |t: f64| thrust / d * (1.0 - (-d / m * t).exp());
    let mut checked = 0;
    simulate(&cfg, 40.0, |s| {
        if (s.clock - 2.0).abs() < 1e-9 || (s.clock - 40.0).abs() < 1e-9 {
            assert!((s.nu[0] - oracle(s.clock)).abs() < 1e-9, "t={} u={}", s.clock, s.nu[0]);
            checked += 1;
        }
    });
    assert_eq!(checked, 2);
    assert!((oracle(40.0) - thrust / d).abs() < 1e-6);
}

#[test]
fn undamped_heave_wave_sets_the_period() {
    let mut cfg = calm();
    let omega0 = 1.3;
    cfg.truth.waves.push(TruthWave {
        channel: Channel::W,
        omega0,
        lambda: 0.0,
        amplitude: 0.4,
    });
    // upward zero crossings of z once the free response has died out
    let mut last_z = 0.0;
    let mut crossings = vec![];
    simulate(&cfg, 120.0, |s| {
        let z = s.eta[2];
        if s.clock > 40.0 && last_z < 0.0 && z >= 0.0 {
            let frac = -last_z / (z - last_z);
            crossings.push(s.clock - cfg.truth.dt * (1.0 - frac));
        }
        last_z = z;
    });
    assert!(crossings.len() > 10);
    let period = (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64;
    let expected = std::f64::consts::TAU / omega0;
    assert!(((period - expected) / expected).abs() < 0.01, "{period} vs {expected}");
}

#[test]
fn kinetic_energy_envelope_decays_without_input() {
    let mut cfg = calm();
    cfg.vessel.initial_velocity = [0.5, -0.3, 0.4, 0.1, -0.1, 0.2];
    let m: Vec<f64> = (0..6).map(|i| cfg.vessel.inertia[i] + cfg.vessel.added_mass[i]).collect();
    let mut window_max = vec![0.0f64; 12];
    simulate(&cfg, 60.0, |s| {
        let ke: f64 = (0..6).map(|i| 0.5 * m[i] * s.nu[i] * s.nu[i]).sum();
        let w = ((s.clock - 1e-9) / 5.0) as usize;
        if w < window_max.len() {
            window_max[w] = window_max[w].max(ke);
        }
    });
    for pair in window_max.windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-9), "{window_max:?}");
    }
    assert!(window_max[11] < 1e-3 * window_max[0]);
}

#[test]
fn pitch_through_ninety_degrees_is_an_error() {
    let mut cfg = calm();
    cfg.vessel.initial_pose[4] = 1.5;
    cfg.vessel.initial_velocity[4] = 5.0;
    let model = TruthModel::new(&cfg).unwrap();
    let mut s = model.initial_state(&cfg, &mut ChaCha8Rng::seed_from_u64(0));
    let mut err = None;
    for _ in 0..100 {
        match step_truth(&model, &s, cfg.truth.dt) {
            Ok(n) => s = n,
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    assert!(matches!(err, Some(SimError::GimbalSingularity { .. })), "{err:?}");
}

#[test]
fn non_positive_step_is_rejected() {
    let cfg = calm();
    let model = TruthModel::new(&cfg).unwrap();
    let s = model.initial_state(&cfg, &mut ChaCha8Rng::seed_from_u64(0));
    assert!(step_truth(&model, &s, 0.0).is_err());
}
