//! Ground-truth USV motion.
//!
//! The nonlinear mode integrates the full Euler kinematics with RK4 and drives
//! the body velocities with a truth wave spectrum that differs from the
//! estimator's bank. The linear mode propagates the estimator's own model.

use nalgebra::{DMatrix, DVector, Matrix6, Vector2, Vector3, Vector6};
use rand::Rng;
use usvwave_core::frames::{euler_rate_matrix, rotation_zyx, yaw_matrix};
use usvwave_core::model::{state_dim, wave_state_index, CHANNELS};
use usvwave_core::planner::UavState;
use usvwave_core::{assemble_usv_model, discretize, wrap_angle, DiscreteModel64, EulerPose};

use crate::config::{ForcingSegment, ScenarioConfig, TruthMode, TruthWave};
use crate::error::{Result, SimError};

/// Everything the simulator knows exactly at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthState {
    /// World pose `(x, y, z, roll, pitch, yaw)`.
    pub eta: Vector6<f64>,
    /// Body velocity `(u, v, w, p, q, r)`.
    pub nu: Vector6<f64>,
    /// `(x1, x2)` per truth wave component (nonlinear mode).
    pub waves: Vec<Vector2<f64>>,
    /// Full linear-model state (linear mode).
    pub linear: Option<DVector<f64>>,
    pub uav: UavState,
    pub clock: f64,
}

impl TruthState {
    pub fn pose(&self) -> EulerPose<f64> {
        EulerPose {
            position: self.eta.fixed_rows::<3>(0).into(),
            orientation: self.eta.fixed_rows::<3>(3).into(),
        }
    }

    /// World-frame velocity of the deck reference point.
    pub fn deck_velocity(&self) -> Vector3<f64> {
        let angles: Vector3<f64> = self.eta.fixed_rows::<3>(3).into();
        rotation_zyx(&angles) * Vector3::new(self.nu[0], self.nu[1], self.nu[2])
    }

    /// State in the estimator's layout `(eta_L, nu, 0...)` or the linear state itself.
    pub fn as_model_state(&self, n_c: usize) -> DVector<f64> {
        if let Some(x) = &self.linear {
            if x.len() == state_dim(n_c) {
                return x.clone();
            }
        }
        let mut x = DVector::zeros(state_dim(n_c));
        let p = yaw_matrix(self.eta[5]).transpose() * Vector3::new(self.eta[0], self.eta[1], self.eta[2]);
        x.fixed_rows_mut::<3>(0).copy_from(&p);
        for i in 3..6 {
            x[i] = self.eta[i];
        }
        x.fixed_rows_mut::<6>(6).copy_from(&self.nu);
        x
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(self.nu.iter()).all(|v| v.is_finite()) && self.uav.is_finite()
    }
}

/// Precomputed truth dynamics for one scenario.
#[derive(Debug, Clone)]
pub struct TruthModel {
    mode: TruthMode,
    m_inv: Matrix6<f64>,
    damping: Matrix6<f64>,
    restoring: Matrix6<f64>,
    waves: Vec<TruthWave>,
    forcing: Vec<ForcingSegment>,
    linear: Option<DiscreteModel64>,
    linear_continuous: Option<DMatrix<f64>>,
    dt: f64,
}

impl TruthModel {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let rigid = cfg.vessel.rigid();
        let m_inv = rigid
            .total_mass()
            .try_inverse()
            .ok_or_else(|| SimError::config("vessel.inertia", "inertia + added_mass is singular"))?;
        let (linear, linear_continuous) = match cfg.truth.mode {
            TruthMode::Nonlinear => (None, None),
            TruthMode::Linear => {
                let bank = cfg.estimator.bank()?;
                let model = assemble_usv_model(&rigid, &bank).map_err(|e| SimError::config("vessel", e.to_string()))?;
                let d = discretize(&model, cfg.truth.dt).map_err(|e| SimError::config("truth.dt", e.to_string()))?;
                (Some(d), Some(model.matrix().clone()))
            }
        };
        Ok(Self {
            mode: cfg.truth.mode,
            m_inv,
            damping: rigid.damping,
            restoring: rigid.restoring,
            waves: cfg.truth.waves.clone(),
            forcing: cfg.truth.forcing.clone(),
            linear,
            linear_continuous,
            dt: cfg.truth.dt,
        })
    }

    pub fn mode(&self) -> TruthMode {
        self.mode
    }

    /// Initial state; wave phases are drawn from `rng`.
    pub fn initial_state(&self, cfg: &ScenarioConfig, rng: &mut impl Rng) -> TruthState {
        let eta = Vector6::from_row_slice(&cfg.vessel.initial_pose);
        let nu = Vector6::from_row_slice(&cfg.vessel.initial_velocity);
        let waves = self
            .waves
            .iter()
            .map(|w| {
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                Vector2::new(w.amplitude / w.omega0 * phase.sin(), w.amplitude * phase.cos())
            })
            .collect();
        let uav = UavState::hovering(Vector3::from(cfg.uav.initial_position));
        let mut state = TruthState {
            eta,
            nu,
            waves,
            linear: None,
            uav,
            clock: 0.0,
        };
        if let Some(model) = &self.linear {
            let n_c = model.n_c();
            let mut x = state.as_model_state(n_c);
            for ch in 0..CHANNELS {
                let amp = cfg.truth.linear_wave_amplitude[ch];
                for (comp, w) in cfg.estimator.waves.iter().enumerate() {
                    let phase = rng.random_range(0.0..std::f64::consts::TAU);
                    x[wave_state_index(n_c, ch, comp, 0)] = amp / w.omega0 * phase.sin();
                    x[wave_state_index(n_c, ch, comp, 1)] = amp * phase.cos();
                }
            }
            state.linear = Some(x);
        }
        state
    }

    fn forcing_at(&self, t: f64) -> Vector6<f64> {
        let seg = self.forcing.iter().rev().find(|s| s.start <= t + 1e-12);
        let mut tau = Vector6::zeros();
        if let Some(s) = seg {
            tau[0] = s.surge_thrust;
            tau[5] = self.damping[(5, 5)] * s.yaw_rate;
        }
        tau
    }

    /// Time derivative of `(eta, nu, waves)` packed into one vector.
    fn derivative(&self, x: &DVector<f64>, tau: &Vector6<f64>, t: f64) -> Result<DVector<f64>> {
        let angles = Vector3::new(x[3], x[4], x[5]);
        let t_rate = euler_rate_matrix(&angles)
            .filter(|_| x[4].abs() < std::f64::consts::FRAC_PI_2)
            .ok_or(SimError::GimbalSingularity { t, pitch: x[4] })?;
        let rot = rotation_zyx(&angles);
        let nu = Vector6::from_iterator(x.rows(6, 6).iter().copied());
        let lin = Vector3::new(nu[0], nu[1], nu[2]);
        let ang = Vector3::new(nu[3], nu[4], nu[5]);

        let mut dx = DVector::zeros(x.len());
        dx.fixed_rows_mut::<3>(0).copy_from(&(rot * lin));
        dx.fixed_rows_mut::<3>(3).copy_from(&(t_rate * ang));

        let p_l = yaw_matrix(x[5]).transpose() * Vector3::new(x[0], x[1], x[2]);
        let eta_l = Vector6::new(p_l.x, p_l.y, p_l.z, x[3], x[4], x[5]);
        let mut nu_dot = self.m_inv * (tau - self.damping * nu - self.restoring * eta_l);
        for (j, w) in self.waves.iter().enumerate() {
            let (x1, x2) = (x[12 + 2 * j], x[13 + 2 * j]);
            nu_dot[w.channel.index()] += x2;
            dx[12 + 2 * j] = x2;
            dx[13 + 2 * j] = -w.omega0 * w.omega0 * x1 - 2.0 * w.lambda * w.omega0 * x2;
        }
        dx.fixed_rows_mut::<6>(6).copy_from(&nu_dot);
        Ok(dx)
    }
}

/// Advances the USV part of `state` by `dt`; the UAV is left untouched.
pub fn step_truth(model: &TruthModel, state: &TruthState, dt: f64) -> Result<TruthState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::config("truth.dt", "step must be positive"));
    }
    let mut next = state.clone();
    next.clock = state.clock + dt;
    if let Some(linear) = &model.linear {
        let x = state.linear.as_ref().expect("linear truth carries its model state");
        let mut xn = if (dt - model.dt).abs() < 1e-15 {
            linear.matrix() * x
        } else {
            let a = model.linear_continuous.as_ref().expect("set with the linear model");
            usvwave_core::expm(&(a * dt)) * x
        };
        for i in 3..6 {
            xn[i] = wrap_angle(xn[i]);
        }
        let p = yaw_matrix(xn[5]) * Vector3::new(xn[0], xn[1], xn[2]);
        next.eta = Vector6::new(p.x, p.y, p.z, xn[3], xn[4], xn[5]);
        next.nu = Vector6::from_iterator(xn.rows(6, 6).iter().copied());
        next.linear = Some(xn);
        return Ok(next);
    }

    let n = 12 + 2 * model.waves.len();
    let mut x = DVector::zeros(n);
    x.rows_mut(0, 6).copy_from(&state.eta);
    x.rows_mut(6, 6).copy_from(&state.nu);
    for (j, w) in state.waves.iter().enumerate() {
        x[12 + 2 * j] = w[0];
        x[13 + 2 * j] = w[1];
    }
    let t = state.clock;
    let tau = model.forcing_at(t);
    let k1 = model.derivative(&x, &tau, t)?;
    let k2 = model.derivative(&(&x + &k1 * (dt / 2.0)), &tau, t)?;
    let k3 = model.derivative(&(&x + &k2 * (dt / 2.0)), &tau, t)?;
    let k4 = model.derivative(&(&x + &k3 * dt), &tau, t)?;
    let xn = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    if xn[4].abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(SimError::GimbalSingularity {
            t: next.clock,
            pitch: xn[4],
        });
    }
    next.eta = Vector6::from_iterator(xn.rows(0, 6).iter().copied());
    for i in 3..6 {
        next.eta[i] = wrap_angle(next.eta[i]);
    }
    next.nu = Vector6::from_iterator(xn.rows(6, 6).iter().copied());
    for (j, w) in next.waves.iter_mut().enumerate() {
        *w = Vector2::new(xn[12 + 2 * j], xn[13 + 2 * j]);
    }
    Ok(next)
}
