//! Closed-loop scenario: truth, sensors, estimator, predictor, planner and UAV.

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;
use usvwave_core::model::state_dim;
use usvwave_core::planner::{Phase, Planner, Setpoint};
use usvwave_core::{
    assemble_usv_model, discretize, predict_mean_horizon, sensor_model_for, Estimator64, ProcessNoise,
    SensorKind, VesselBelief,
};

use crate::config::{ratio, ScenarioConfig, Task};
use crate::error::{Result, SimError};
use crate::runlog::{LogRow, RunHeader, RunLog};
use crate::sensors::{stream, SensorSuite, STREAM_ESTIMATOR, STREAM_TRUTH};
use crate::truth::{step_truth, TruthModel, TruthState};
use crate::uav::{UavCommand, UavPlant};

/// Builds the estimator for `cfg.variant`, starting from a belief drawn around `truth`.
pub fn build_estimator(cfg: &ScenarioConfig, truth: &TruthState, rng: &mut impl Rng) -> Result<Estimator64> {
    let bank = cfg.effective_bank()?;
    let n_c = bank.len();
    let model = assemble_usv_model(&cfg.vessel.rigid(), &bank).map_err(|e| SimError::config("vessel", e.to_string()))?;
    let discrete = discretize(&model, cfg.estimator.dt).map_err(|e| SimError::config("estimator.dt", e.to_string()))?;
    let q = ProcessNoise::diagonal(n_c, &cfg.estimator.process_noise.to_core());

    // the initial spread covers both wave sub-states, unlike the process noise
    let init = &cfg.estimator.initial_std;
    let mut variances = ProcessNoise::diagonal(n_c, &init.to_core()).q.diagonal();
    for v in variances.iter_mut().skip(12) {
        *v = init.wave * init.wave;
    }
    let mut mean = truth.as_model_state(n_c);
    for (m, v) in mean.iter_mut().zip(variances.iter()) {
        *m += v.sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    for i in 3..6 {
        mean[i] = usvwave_core::wrap_angle(mean[i]);
    }
    let belief = VesselBelief::with_diagonal(mean, &variances, truth.clock).map_err(SimError::core(truth.clock))?;
    let sensors = cfg
        .variant
        .fused()
        .into_iter()
        .map(|k| sensor_model_for(k, &cfg.sensor_settings(k), n_c))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(SimError::core(truth.clock))?;
    Estimator64::new(discrete, q, sensors, belief).map_err(SimError::core(truth.clock))
}

/// Runs `cfg` to completion. A land task stops at the first truth contact.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunLog> {
    cfg.validate()?;
    let dt = cfg.truth.dt;
    let header = RunHeader {
        seed: cfg.seed,
        task: cfg.task,
        variant: cfg.variant,
        sim_dt: dt,
        warmup: cfg.warmup,
    };
    let ticks = (cfg.duration / dt + 1e-9).floor() as u64;
    let mut rows = Vec::with_capacity(ticks as usize + 1);

    let model = TruthModel::new(cfg)?;
    let mut truth_rng = stream(cfg.seed, STREAM_TRUTH);
    let mut est_rng = stream(cfg.seed, STREAM_ESTIMATOR);
    let mut state = model.initial_state(cfg, &mut truth_rng);
    let mut sensors = SensorSuite::new(&cfg.sensors, cfg.seed, dt);
    let mut estimator = build_estimator(cfg, &state, &mut est_rng)?;
    let n_c = estimator.model().n_c();
    debug_assert_eq!(estimator.model().dim(), state_dim(n_c));

    let est_every = ratio(cfg.estimator.dt, dt).expect("validated");
    let planner_every = est_every * ratio(cfg.planner.follow.dt, cfg.estimator.dt).expect("validated");
    let plant = UavPlant::new(&cfg.uav);
    let mut planner = match cfg.task {
        Task::EstimateOnly => None,
        _ => Some(
            Planner::new(cfg.planner.follow.clone(), cfg.planner.landing.clone())
                .map_err(|e| SimError::config("planner", e.to_string()))?,
        ),
    };
    let mut command = UavCommand::hold(state.uav.position);
    let mut segment: Option<(f64, Setpoint)> = None;
    let mut landing_due = (cfg.task == Task::Land).then_some(cfg.landing_task.start);
    let mut last_phase = Phase::Follow;

    for tick in 0..ticks {
        let t = tick as f64 * dt;
        for m in sensors.emit(tick, &state)? {
            estimator.push(m);
        }
        estimator.advance_to(t).map_err(SimError::core(t))?;

        let mut pred_t = f64::NAN;
        let mut pred_pose = [f64::NAN; 6];
        let mut horizon = None;
        if tick % est_every == 0 {
            let h = predict_mean_horizon(estimator.belief(), estimator.model(), cfg.predictor.steps)
                .map_err(SimError::core(t))?;
            pred_t = h.end_stamp();
            pred_pose = h.world_pose(h.steps()).to_vector().into();
            horizon = Some(h);
        }

        if let (Some(p), Some(h)) = (planner.as_mut(), horizon.as_ref()) {
            if tick % planner_every == 0 {
                if landing_due.is_some_and(|at| t >= at - 1e-9) && p.phase() == Phase::Follow {
                    p.command_landing();
                    landing_due = None;
                }
                let (plan, _) = p.step(t, &state.uav, estimator.belief(), h).map_err(SimError::core(t))?;
                if last_phase == Phase::Aborted && plan.phase == Phase::Follow && cfg.task == Task::Land {
                    landing_due = Some(t + cfg.landing_task.retry_delay);
                }
                last_phase = plan.phase;
                segment = Some((t, plan.setpoints[0]));
            }
        }
        if let Some((t0, sp)) = segment {
            // replay the first plan step: constant acceleration from its start state
            let h = cfg.planner.follow.dt;
            let v0 = sp.velocity - sp.acceleration * h;
            let p0 = sp.position - v0 * h - sp.acceleration * (0.5 * h * h);
            let tau = (t - t0).min(h);
            command = UavCommand {
                position: p0 + v0 * tau + sp.acceleration * (0.5 * tau * tau),
                velocity: v0 + sp.acceleration * tau,
                acceleration: sp.acceleration,
            };
        }

        rows.push(make_row(t, planner.as_ref().map(|p| p.phase()), &state, &estimator, pred_t, pred_pose, segment.map(|s| s.1)));

        let uav = plant.step(&state.uav, &command, dt);
        let mut next = step_truth(&model, &state, dt)?;
        next.clock = (tick + 1) as f64 * dt;
        next.uav = uav;
        state = next;

        if planner.is_some() && state.uav.position.z <= state.eta[2] {
            let mut row = make_row(
                state.clock,
                planner.as_ref().map(|p| p.phase()),
                &state,
                &estimator,
                f64::NAN,
                [f64::NAN; 6],
                segment.map(|s| s.1),
            );
            row.contact_speed = state.uav.velocity.z - state.deck_velocity().z;
            rows.push(row);
            break;
        }
    }
    Ok(RunLog { header, rows })
}

fn make_row(
    t: f64,
    phase: Option<Phase>,
    state: &TruthState,
    estimator: &Estimator64,
    pred_t: f64,
    pred_pose: [f64; 6],
    setpoint: Option<Setpoint>,
) -> LogRow {
    let b = estimator.belief();
    let nan3 = Vector3::repeat(f64::NAN);
    let (sp_t, sp_p, sp_v) = setpoint.map_or((f64::NAN, nan3, nan3), |s| (s.stamp, s.position, s.velocity));
    LogRow {
        t,
        phase,
        truth_pose: state.eta.into(),
        truth_velocity: state.nu.into(),
        est_t: b.stamp,
        est_pose: b.world_pose().to_vector().into(),
        est_velocity: b.body_velocity().to_vector().into(),
        pred_t,
        pred_pose,
        uav_position: state.uav.position.into(),
        uav_velocity: state.uav.velocity.into(),
        sp_t,
        sp_position: sp_p.into(),
        sp_velocity: sp_v.into(),
        deck_vz: state.deck_velocity().z,
        counters: SensorKind::ALL.map(|k| {
            let c = estimator.counters(k);
            [c.accepted, c.rejected, c.dropped_late, c.ignored]
        }),
        contact_speed: f64::NAN,
    }
}
