//! Fixed-step RK4 integration of the per-machine swing equations
//! `d(delta_i)/dt = omega_i`, `M_i d(omega_i)/dt = Pm_i - Pe_i`.

use crate::error::{Error, Result};
use crate::model::{validate, MachineState, PowerVector, ReducedNetwork, Scenario, Trajectory};
use crate::netsolve::injections_into;
use crate::scalar::{lit, to_f64, Real};

/// Simulates the fault-on stage on `[0, t_clear]` and the post-fault stage on
/// `[t_clear, t_end]`. Both stage ends land exactly on a sample.
pub fn simulate<T: Real>(scenario: &Scenario<T>) -> Result<Trajectory<T>> {
    let violations = validate(scenario);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Integrator::new(scenario).run()
}

/// [`simulate`] with the step divided by `factor`.
pub fn refine_dt<T: Real>(scenario: &Scenario<T>, factor: u32) -> Result<Trajectory<T>> {
    if factor == 0 {
        return Err(Error::Validation(vec!["refine factor must be >= 1".into()]));
    }
    if factor == 1 {
        return simulate(scenario);
    }
    simulate(&scenario.with_dt(scenario.dt / lit(factor as f64)))
}

/// Sample times `t0 + k dt` with the final step shortened (or very slightly
/// stretched) so the last sample equals `t1` bit-exactly.
pub(crate) fn stage_times<T: Real>(t0: T, t1: T, dt: T) -> Vec<T> {
    let ratio = to_f64((t1 - t0) / dt);
    let steps = ((ratio - 1e-6).ceil() as usize).max(1);
    let mut out: Vec<T> = (0..steps).map(|k| t0 + lit::<T>(k as f64) * dt).collect();
    out.push(t1);
    out
}

struct Integrator<'a, T> {
    scenario: &'a Scenario<T>,
    inv_m: Vec<T>,
    scratch: Vec<T>,
}

impl<'a, T: Real> Integrator<'a, T> {
    fn new(scenario: &'a Scenario<T>) -> Self {
        let n = scenario.n_machines();
        Self {
            scenario,
            inv_m: scenario.machines.iter().map(|m| T::one() / m.inertia).collect(),
            scratch: vec![T::zero(); n],
        }
    }

    fn run(mut self) -> Result<Trajectory<T>> {
        let sc = self.scenario;
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut pe = Vec::new();

        let mut delta = sc.initial_angles.clone();
        let mut omega = sc.initial_speeds.clone();

        let stages = [
            (&sc.networks.fault, T::zero(), sc.t_clear),
            (&sc.networks.postfault, sc.t_clear, sc.t_end),
        ];
        let mut stage_marks = Vec::with_capacity(2);
        for (si, (net, t0, t1)) in stages.into_iter().enumerate() {
            let grid = stage_times(t0, t1, sc.dt);
            stage_marks.push(times.len().saturating_sub(1));
            // The stage's first sample was already stored as the previous stage's
            // last one; only its powers are refreshed for the new network.
            if si > 0 {
                let last = pe.len() - 1;
                pe[last] = self.powers(&delta, net);
            } else {
                times.push(grid[0]);
                states.push(MachineState {
                    delta: delta.clone(),
                    omega: omega.clone(),
                });
                pe.push(self.powers(&delta, net));
            }
            for w in grid.windows(2) {
                let h = w[1] - w[0];
                self.step(net, &mut delta, &mut omega, h);
                self.check_finite(&delta, &omega, w[1])?;
                times.push(w[1]);
                states.push(MachineState {
                    delta: delta.clone(),
                    omega: omega.clone(),
                });
                pe.push(self.powers(&delta, net));
            }
        }

        Ok(Trajectory {
            ids: sc.ids(),
            inertia: sc.machines.iter().map(|m| m.inertia).collect(),
            pm: sc.machines.iter().map(|m| m.pm).collect(),
            times,
            states,
            pe,
            stage_marks,
        })
    }

    fn powers(&mut self, delta: &[T], net: &ReducedNetwork<T>) -> PowerVector<T> {
        injections_into(delta, net, &self.scenario.machines, &mut self.scratch);
        PowerVector {
            pe: self.scratch.clone(),
        }
    }

    /// Writes d(omega)/dt into `out`.
    fn accel(&mut self, net: &ReducedNetwork<T>, delta: &[T], out: &mut [T]) {
        injections_into(delta, net, &self.scenario.machines, &mut self.scratch);
        for (i, m) in self.scenario.machines.iter().enumerate() {
            out[i] = (m.pm - self.scratch[i]) * self.inv_m[i];
        }
    }

    fn step(&mut self, net: &ReducedNetwork<T>, delta: &mut [T], omega: &mut [T], h: T) {
        let n = delta.len();
        let half = lit::<T>(0.5) * h;
        let sixth = h / lit(6.0);
        let two = lit::<T>(2.0);

        let mut a1 = vec![T::zero(); n];
        let mut a2 = vec![T::zero(); n];
        let mut a3 = vec![T::zero(); n];
        let mut a4 = vec![T::zero(); n];
        let mut tmp = vec![T::zero(); n];

        // k1
        self.accel(net, delta, &mut a1);
        let v1 = omega.to_vec();
        // k2
        for i in 0..n {
            tmp[i] = delta[i] + half * v1[i];
        }
        self.accel(net, &tmp, &mut a2);
        let v2: Vec<T> = (0..n).map(|i| omega[i] + half * a1[i]).collect();
        // k3
        for i in 0..n {
            tmp[i] = delta[i] + half * v2[i];
        }
        self.accel(net, &tmp, &mut a3);
        let v3: Vec<T> = (0..n).map(|i| omega[i] + half * a2[i]).collect();
        // k4
        for i in 0..n {
            tmp[i] = delta[i] + h * v3[i];
        }
        self.accel(net, &tmp, &mut a4);
        let v4: Vec<T> = (0..n).map(|i| omega[i] + h * a3[i]).collect();

        for i in 0..n {
            delta[i] = delta[i] + sixth * (v1[i] + two * v2[i] + two * v3[i] + v4[i]);
            omega[i] = omega[i] + sixth * (a1[i] + two * a2[i] + two * a3[i] + a4[i]);
        }
    }

    fn check_finite(&self, delta: &[T], omega: &[T], t: T) -> Result<()> {
        for i in 0..delta.len() {
            if !delta[i].is_finite() || !omega[i].is_finite() {
                return Err(Error::NonFinite {
                    time: to_f64(t),
                    machine: self.scenario.machines[i].id,
                });
            }
        }
        Ok(())
    }
}
