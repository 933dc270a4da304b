//! Condensed per-axis MPC over accelerations of a double integrator.
//!
//! With `a = (a_0 .. a_{N-1})` the stacked positions and velocities are
//! `P = S_p a + p_free` and `V = S_v a + v_free`, so the objective is the
//! quadratic `a' H a + 2 g' a + c` with `H = w_p S_p'S_p + w_v S_v'S_v + w_a I`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Vector3};

use super::{FollowConfig, Phase, PlanOutput, Reference, Setpoint, UavState};
use crate::error::{invalid, CoreError, Result};

/// Factorized MPC problem for one configuration; reusable across ticks.
#[derive(Debug, Clone)]
pub struct MpcSolver {
    cfg: FollowConfig,
    sp: DMatrix<f64>,
    sv: DMatrix<f64>,
    h: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    /// Upper bound on the largest eigenvalue of `H` (Gershgorin).
    lipschitz: f64,
}

impl MpcSolver {
    pub fn new(cfg: &FollowConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.steps;
        let dt = cfg.dt;
        // p_k (k = 1..N) depends on a_j for j < k - 1 with weight (k - 1 - j) dt^2
        let sp = DMatrix::from_fn(n, n, |row, j| {
            let k = row + 1;
            if j + 1 < k {
                (k - 1 - j) as f64 * dt * dt
            } else {
                0.0
            }
        });
        let sv = DMatrix::from_fn(n, n, |row, j| if j <= row { dt } else { 0.0 });
        let h = sp.transpose() * &sp * cfg.weight_position
            + sv.transpose() * &sv * cfg.weight_velocity
            + DMatrix::identity(n, n) * cfg.weight_acceleration;
        let chol = Cholesky::new(h.clone())
            .ok_or_else(|| CoreError::SingularMatrix("MPC Hessian is not positive definite".into()))?;
        let lipschitz = h
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            cfg: cfg.clone(),
            sp,
            sv,
            h,
            chol,
            lipschitz,
        })
    }

    pub fn config(&self) -> &FollowConfig {
        &self.cfg
    }

    /// Plans from `uav` over `reference`. The start velocity is clamped to the
    /// speed limits; every returned setpoint satisfies both limits.
    pub fn solve(&self, uav: &UavState, reference: &Reference, phase: Phase) -> Result<PlanOutput> {
        if !uav.is_finite() {
            return Err(invalid("UAV state must be finite"));
        }
        let n = self.cfg.steps;
        if reference.len() != n || reference.velocity.len() != n {
            return Err(invalid(format!(
                "reference has {} samples, the MPC window needs {n}",
                reference.len()
            )));
        }
        if (reference.dt - self.cfg.dt).abs() > 1e-12 {
            return Err(invalid("reference step differs from the MPC step"));
        }
        if reference
            .position
            .iter()
            .chain(&reference.velocity)
            .any(|p| p.iter().any(|x| !x.is_finite()))
        {
            return Err(invalid("reference must be finite"));
        }

        let dt = self.cfg.dt;
        let mut acc = vec![Vector3::zeros(); n];
        let mut pos = vec![Vector3::zeros(); n];
        let mut vel = vec![Vector3::zeros(); n];
        let mut cost = 0.0;
        for axis in 0..3 {
            let v_max = self.cfg.v_max[axis];
            let a_max = self.cfg.a_max[axis];
            let p0 = uav.position[axis];
            let v0 = uav.velocity[axis].clamp(-v_max, v_max);
            let r = DVector::from_fn(n, |k, _| reference.position[k][axis]);
            let rd = DVector::from_fn(n, |k, _| reference.velocity[k][axis]);
            let a = self.axis_accelerations(p0, v0, &r, &rd, a_max);

            let (mut p, mut v) = (p0, v0);
            for k in 0..n {
                let lo = (-a_max).max((-v_max - v) / dt);
                let hi = a_max.min((v_max - v) / dt);
                let ak = a[k].clamp(lo.min(hi), hi);
                p += v * dt;
                v += ak * dt;
                acc[k][axis] = ak;
                pos[k][axis] = p;
                vel[k][axis] = v;
                cost += self.cfg.weight_position * (p - r[k]).powi(2)
                    + self.cfg.weight_velocity * (v - rd[k]).powi(2)
                    + self.cfg.weight_acceleration * ak * ak;
            }
        }

        let setpoints = (0..n)
            .map(|k| Setpoint {
                stamp: reference.stamp(k),
                position: pos[k],
                velocity: vel[k],
                acceleration: acc[k],
            })
            .collect();
        Ok(PlanOutput { setpoints, phase, cost })
    }

    fn axis_accelerations(&self, p0: f64, v0: f64, r: &DVector<f64>, rd: &DVector<f64>, a_max: f64) -> DVector<f64> {
        let n = self.cfg.steps;
        let dt = self.cfg.dt;
        let p_free = DVector::from_fn(n, |k, _| p0 + (k + 1) as f64 * dt * v0);
        let v_free = DVector::from_element(n, v0);
        let g = self.sp.tr_mul(&(p_free - r)) * self.cfg.weight_position
            + self.sv.tr_mul(&(v_free - rd)) * self.cfg.weight_velocity;
        let unconstrained = self.chol.solve(&(-&g));
        let mut a = unconstrained.map(|x| x.clamp(-a_max, a_max));
        if a == unconstrained {
            return a;
        }
        let step = 1.0 / self.lipschitz;
        for _ in 0..self.cfg.iterations {
            let grad = &self.h * &a + &g;
            a -= grad * step;
            a.apply(|x| *x = x.clamp(-a_max, a_max));
        }
        a
    }
}

/// One-shot solve; builds and factorizes the problem for `cfg`.
pub fn mpc_solve(uav: &UavState, reference: &Reference, cfg: &FollowConfig, phase: Phase) -> Result<PlanOutput> {
    MpcSolver::new(cfg)?.solve(uav, reference, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn objective(cfg: &FollowConfig, uav: &UavState, reference: &Reference, acc: &[Vector3<f64>]) -> f64 {
        // plain forward simulation of the double integrator
        let mut p = uav.position;
        let mut v = uav.velocity;
        let mut j = 0.0;
        for k in 0..acc.len() {
            p += v * cfg.dt;
            v += acc[k] * cfg.dt;
            j += cfg.weight_position * (p - reference.position[k]).norm_squared()
                + cfg.weight_velocity * (v - reference.velocity[k]).norm_squared()
                + cfg.weight_acceleration * acc[k].norm_squared();
        }
        j
    }

    fn generous() -> FollowConfig {
        FollowConfig {
            v_max: [50.0; 3],
            a_max: [100.0; 3],
            ..FollowConfig::default()
        }
    }

    #[test]
    fn resting_on_the_reference_needs_no_effort() {
        let cfg = FollowConfig::default();
        let p = Vector3::new(1.0, -2.0, 3.0);
        let out = mpc_solve(&UavState::hovering(p), &Reference::constant(0.0, cfg.dt, cfg.steps, p), &cfg, Phase::Follow)
            .unwrap();
        assert!(out.cost <= 1e-20);
        for s in &out.setpoints {
            assert!(s.acceleration.norm() < 1e-12);
            assert!((s.position - p).norm() < 1e-12);
        }
    }

    #[test]
    fn unconstrained_plan_is_a_stationary_point() {
        let cfg = generous();
        let uav = UavState::new(Vector3::new(0.3, 0.0, 1.0), Vector3::new(0.5, -0.2, 0.0)).unwrap();
        let mut reference = Reference::constant(0.0, cfg.dt, cfg.steps, Vector3::zeros());
        for k in 0..cfg.steps {
            let t = (k + 1) as f64 * cfg.dt;
            reference.position[k] = Vector3::new(t.sin(), 0.5 * t, 2.0 + 0.2 * (2.0 * t).cos());
            reference.velocity[k] = Vector3::new(t.cos(), 0.5, -0.4 * (2.0 * t).sin());
        }
        let out = MpcSolver::new(&cfg).unwrap().solve(&uav, &reference, Phase::Follow).unwrap();
        let acc: Vec<_> = out.setpoints.iter().map(|s| s.acceleration).collect();
        let j0 = objective(&cfg, &uav, &reference, &acc);
        assert!((j0 - out.cost).abs() < 1e-9 * j0.max(1.0));
        let h = 1e-4;
        for k in [0, 1, 17, 50, 99] {
            for axis in 0..3 {
                let mut plus = acc.clone();
                plus[k][axis] += h;
                let mut minus = acc.clone();
                minus[k][axis] -= h;
                let jp = objective(&cfg, &uav, &reference, &plus);
                let jm = objective(&cfg, &uav, &reference, &minus);
                let slope = (jp - jm) / (2.0 * h);
                assert!(slope.abs() < 1e-6, "k={k} axis={axis} slope={slope}");
                assert!(jp >= j0 && jm >= j0);
            }
        }
    }

    #[test]
    fn step_reference_has_bounded_overshoot() {
        let cfg = generous();
        let solver = MpcSolver::new(&cfg).unwrap();
        let target = Vector3::new(1.0, 0.0, 0.0);
        let mut uav = UavState::hovering(Vector3::zeros());
        let mut peak: f64 = 0.0;
        let mut last = 0.0;
        // receding horizon, the plan's first sample becomes the next start
        for tick in 0..300 {
            let t0 = tick as f64 * cfg.dt;
            let out = solver
                .solve(&uav, &Reference::constant(t0, cfg.dt, cfg.steps, target), Phase::Follow)
                .unwrap();
            let s = out.setpoints[0];
            uav = UavState::new(s.position, s.velocity).unwrap();
            peak = peak.max(s.position.x);
            if peak < 0.9 {
                assert!(s.position.x >= last - 1e-12, "approach must be monotone");
            }
            last = s.position.x;
        }
        assert!(peak <= 1.2, "overshoot {peak}");
        assert!((last - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_speed_limit_freezes_the_plan() {
        let cfg = FollowConfig {
            v_max: [0.0; 3],
            ..FollowConfig::default()
        };
        let p = Vector3::new(0.0, 1.0, 2.0);
        let uav = UavState::new(p, Vector3::new(1.0, 0.0, -1.0)).unwrap();
        let reference = Reference::constant(0.0, cfg.dt, cfg.steps, Vector3::new(5.0, 5.0, 5.0));
        let out = mpc_solve(&uav, &reference, &cfg, Phase::Follow).unwrap();
        for s in &out.setpoints {
            assert_eq!(s.position, p);
            assert_eq!(s.velocity, Vector3::zeros());
        }
    }

    #[test]
    fn nan_start_is_rejected() {
        let cfg = FollowConfig::default();
        let uav = UavState {
            position: Vector3::new(f64::NAN, 0.0, 0.0),
            velocity: Vector3::zeros(),
        };
        let reference = Reference::constant(0.0, cfg.dt, cfg.steps, Vector3::zeros());
        assert!(matches!(
            mpc_solve(&uav, &reference, &cfg, Phase::Follow),
            Err(CoreError::InvalidArgument(_))
        ));
        let short = Reference::constant(0.0, cfg.dt, 10, Vector3::zeros());
        assert!(mpc_solve(&UavState::hovering(Vector3::zeros()), &short, &cfg, Phase::Follow).is_err());
    }

    #[test]
    fn projected_gradient_beats_plain_clamping() {
        let cfg = FollowConfig::default();
        let solver = MpcSolver::new(&cfg).unwrap();
        let uav = UavState::hovering(Vector3::zeros());
        let reference = Reference::constant(0.0, cfg.dt, cfg.steps, Vector3::new(10.0, -6.0, 3.0));
        let out = solver.solve(&uav, &reference, Phase::Follow).unwrap();
        let no_pg = MpcSolver::new(&FollowConfig { iterations: 0, ..cfg.clone() })
            .unwrap()
            .solve(&uav, &reference, Phase::Follow)
            .unwrap();
        assert!(out.cost <= no_pg.cost + 1e-9);
    }

    proptest! {
        #[test]
        fn setpoints_respect_limits(
            p in prop::array::uniform3(-20.0f64..20.0),
            v in prop::array::uniform3(-6.0f64..6.0),
            r in prop::array::uniform3(-20.0f64..20.0),
            rv in prop::array::uniform3(-4.0f64..4.0),
            vmax in 0.0f64..3.0,
            amax in 0.1f64..5.0,
        ) {
            let cfg = FollowConfig { v_max: [vmax; 3], a_max: [amax; 3], steps: 40, ..FollowConfig::default() };
            let uav = UavState::new(Vector3::from(p), Vector3::from(v)).unwrap();
            let mut reference = Reference::constant(1.0, cfg.dt, cfg.steps, Vector3::from(r));
            reference.velocity = vec![Vector3::from(rv); cfg.steps];
            let out = mpc_solve(&uav, &reference, &cfg, Phase::Follow).unwrap();
            let mut prev_v = uav.velocity.map(|x| x.clamp(-vmax, vmax));
            let mut prev_t = 1.0;
            for s in &out.setpoints {
                prop_assert!(s.stamp > prev_t);
                for i in 0..3 {
                    prop_assert!(s.velocity[i].abs() <= vmax + 1e-9);
                    prop_assert!((s.velocity[i] - prev_v[i]).abs() <= amax * cfg.dt + 1e-9);
                }
                prev_v = s.velocity;
                prev_t = s.stamp;
            }
        }
    }
}
