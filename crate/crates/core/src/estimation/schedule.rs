//! Multi-rate scheduling: fixed-cadence prediction with asynchronous corrections.

use super::belief::VesselBelief;
use super::filter::{correct_step, predict_step, ProcessNoise};
use super::sensor::{transform_measurement, Measurement, SensorKind, SensorModel};
use crate::discrete::DiscreteModel;
use crate::error::{invalid, Result};
use crate::real::{lit, Real};

/// Per-sensor bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SensorCounters {
    pub accepted: u64,
    /// Rejected by the innovation gate.
    pub rejected: u64,
    /// Older than one estimator period when it arrived.
    pub dropped_late: u64,
    /// The sensor is not fused by this estimator.
    pub ignored: u64,
}

/// Sequential LKF loop. Predicts on a fixed grid `origin + k dt` and applies
/// queued measurements in `(stamp, kind)` order once the grid reaches their stamp.
#[derive(Debug, Clone)]
pub struct Estimator<T: Real> {
    model: DiscreteModel<T>,
    q: ProcessNoise<T>,
    sensors: [Option<SensorModel<T>>; 4],
    belief: VesselBelief<T>,
    origin: T,
    steps: u64,
    queue: Vec<Measurement<T>>,
    counters: [SensorCounters; 4],
}

impl<T: Real> Estimator<T> {
    pub fn new(
        model: DiscreteModel<T>,
        q: ProcessNoise<T>,
        sensors: Vec<SensorModel<T>>,
        initial: VesselBelief<T>,
    ) -> Result<Self> {
        if !initial.check_dim(model.n_c()) || q.dim() != model.dim() {
            return Err(invalid("belief, model and process noise dimensions disagree"));
        }
        let mut slots: [Option<SensorModel<T>>; 4] = Default::default();
        for sm in sensors {
            if sm.c.ncols() != model.dim() {
                return Err(invalid(format!("{} observation model has wrong state dimension", sm.kind)));
            }
            let idx = sm.kind.index();
            slots[idx] = Some(sm);
        }
        Ok(Self {
            model,
            q,
            sensors: slots,
            origin: initial.stamp,
            belief: initial,
            steps: 0,
            queue: Vec::new(),
            counters: [SensorCounters::default(); 4],
        })
    }

    pub fn belief(&self) -> &VesselBelief<T> {
        &self.belief
    }

    pub fn model(&self) -> &DiscreteModel<T> {
        &self.model
    }

    pub fn process_noise(&self) -> &ProcessNoise<T> {
        &self.q
    }

    pub fn counters(&self, kind: SensorKind) -> SensorCounters {
        self.counters[kind.index()]
    }

    pub fn fuses(&self, kind: SensorKind) -> bool {
        self.sensors[kind.index()].is_some()
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    fn tolerance(&self) -> T {
        self.model.dt() * lit(1e-6)
    }

    /// Queues a measurement. Stale measurements are dropped and counted.
    pub fn push(&mut self, meas: Measurement<T>) {
        let idx = meas.kind.index();
        if self.sensors[idx].is_none() {
            self.counters[idx].ignored += 1;
            return;
        }
        if meas.stamp < self.belief.stamp - self.model.dt() - self.tolerance() {
            self.counters[idx].dropped_late += 1;
            return;
        }
        let key = (meas.stamp, meas.kind);
        let at = self
            .queue
            .partition_point(|m| (m.stamp, m.kind).partial_cmp(&key) != Some(std::cmp::Ordering::Greater));
        self.queue.insert(at, meas);
    }

    /// Runs predictions up to the last grid point not after `t`, correcting
    /// with every queued measurement whose stamp has been reached.
    pub fn advance_to(&mut self, t: T) -> Result<()> {
        self.apply_due()?;
        loop {
            let next = self.origin + self.model.dt() * lit::<T>((self.steps + 1) as f64);
            if next > t + self.tolerance() {
                break;
            }
            let mut b = predict_step(&self.belief, &self.model, &self.q);
            b.stamp = next;
            self.belief = b;
            self.steps += 1;
            self.apply_due()?;
        }
        Ok(())
    }

    fn apply_due(&mut self) -> Result<()> {
        let limit = self.belief.stamp + self.tolerance();
        let due = self.queue.partition_point(|m| m.stamp <= limit);
        let ready: Vec<Measurement<T>> = self.queue.drain(..due).collect();
        for meas in ready {
            let idx = meas.kind.index();
            let sm = self.sensors[idx].as_ref().expect("queued measurement has a sensor model");
            let vp = transform_measurement(&meas, self.belief.yaw())?;
            let out = correct_step(&self.belief, &vp, sm)?;
            if out.accepted {
                self.counters[idx].accepted += 1;
                self.belief = out.belief;
            } else {
                self.counters[idx].rejected += 1;
            }
        }
        Ok(())
    }
}

/// Batch form of [`Estimator`]: feeds all measurements, then advances to `until`.
pub fn process_in_order<T: Real>(
    belief: VesselBelief<T>,
    model: &DiscreteModel<T>,
    q: &ProcessNoise<T>,
    sensors: &[SensorModel<T>],
    measurements: impl IntoIterator<Item = Measurement<T>>,
    until: T,
) -> Result<(VesselBelief<T>, [SensorCounters; 4])> {
    let mut est = Estimator::new(model.clone(), q.clone(), sensors.to_vec(), belief)?;
    for m in measurements {
        est.push(m);
    }
    est.advance_to(until)?;
    let counters = SensorKind::ALL.map(|k| est.counters(k));
    Ok((est.belief, counters))
}
