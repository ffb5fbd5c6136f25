#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use eqm_core::model::{load_scenario, MachineParams, NetworkStages, ReducedNetwork, Scenario, SquareMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> Scenario<f64> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub const FIXTURES: [&str; 4] = [
    "smib.json",
    "three_machine_stable.json",
    "three_machine_unstable.json",
    "runaway.json",
];

/// Straightforward RK4 on the swing equations, written without any of the
/// library's machinery. Returns the state at `t_at` (which must be a
/// multiple of the step inside one stage) as (angles, speeds).
pub fn reference_state(s: &Scenario<f64>, steps_per_dt: usize, t_at: f64) -> (Vec<f64>, Vec<f64>) {
    let n = s.machines.len();
    let h = s.dt / steps_per_dt as f64;
    let accel = |g: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>, d: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let ei = s.machines[i].emf;
                let mut pe = ei * ei * g[i][i];
                for j in 0..n {
                    if j != i {
                        let dij = d[i] - d[j];
                        pe += ei * s.machines[j].emf * (b[i][j] * dij.sin() + g[i][j] * dij.cos());
                    }
                }
                (s.machines[i].pm - pe) / s.machines[i].inertia
            })
            .collect()
    };
    let mut d = s.initial_angles.clone();
    let mut w = s.initial_speeds.clone();
    let mut t = 0.0;
    let run = |net: &ReducedNetwork<f64>, t_stop: f64, d: &mut Vec<f64>, w: &mut Vec<f64>, t: &mut f64| {
        let g = net.conductance.rows();
        let b = net.susceptance.rows();
        let steps = ((t_stop - *t) / h).round() as usize;
        for _ in 0..steps {
            let a1 = accel(&g, &b, d);
            let v1 = w.clone();
            let d2: Vec<f64> = (0..n).map(|i| d[i] + 0.5 * h * v1[i]).collect();
            let a2 = accel(&g, &b, &d2);
            let v2: Vec<f64> = (0..n).map(|i| w[i] + 0.5 * h * a1[i]).collect();
            let d3: Vec<f64> = (0..n).map(|i| d[i] + 0.5 * h * v2[i]).collect();
            let a3 = accel(&g, &b, &d3);
            let v3: Vec<f64> = (0..n).map(|i| w[i] + 0.5 * h * a2[i]).collect();
            let d4: Vec<f64> = (0..n).map(|i| d[i] + h * v3[i]).collect();
            let a4 = accel(&g, &b, &d4);
            let v4: Vec<f64> = (0..n).map(|i| w[i] + h * a3[i]).collect();
            for i in 0..n {
                d[i] += h / 6.0 * (v1[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
                w[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
            }
            *t += h;
        }
    };
    if t_at <= s.t_clear {
        run(&s.networks.fault, t_at, &mut d, &mut w, &mut t);
    } else {
        run(&s.networks.fault, s.t_clear, &mut d, &mut w, &mut t);
        run(&s.networks.postfault, t_at, &mut d, &mut w, &mut t);
    }
    (d, w)
}

/// Closed-form single-machine-infinite-bus results for the SMIB fixture.
pub struct SmibOracle {
    pub m: f64,
    pub pm: f64,
    pub pmax: f64,
    pub delta0: f64,
    /// Effective inertia of the relative motion of the two-machine encoding.
    pub m_eff: f64,
}

impl SmibOracle {
    pub fn of(s: &Scenario<f64>) -> Self {
        let (m1, m2) = (s.machines[0].inertia, s.machines[1].inertia);
        Self {
            m: m1,
            pm: s.machines[0].pm,
            pmax: s.networks.postfault.susceptance.get(0, 1),
            delta0: s.initial_angles[0] - s.initial_angles[1],
            m_eff: m1 * m2 / (m1 + m2),
        }
    }

    pub fn delta_u(&self) -> f64 {
        PI - self.delta0
    }

    /// Angle reached after a fault of length `t` with zero transfer.
    pub fn clearing_angle(&self, t: f64) -> f64 {
        self.delta0 + 0.5 * self.pm / self.m_eff * t * t
    }

    pub fn critical_angle(&self) -> f64 {
        let du = self.delta_u();
        (self.pm / self.pmax * (du - self.delta0) + du.cos()).acos()
    }

    pub fn critical_clearing_time(&self) -> f64 {
        (2.0 * self.m_eff * (self.critical_angle() - self.delta0) / self.pm).sqrt()
    }

    /// Sine-curve areas scaled to the equivalent machine's accounting.
    fn scale(&self) -> f64 {
        self.m / self.m_eff
    }

    pub fn a_acc(&self, t_clear: f64) -> f64 {
        self.scale() * self.pm * (self.clearing_angle(t_clear) - self.delta0)
    }

    /// Deceleration area from the clearing angle to `to`.
    pub fn a_dec(&self, t_clear: f64, to: f64) -> f64 {
        let dc = self.clearing_angle(t_clear);
        self.scale() * (self.pmax * (dc.cos() - to.cos()) - self.pm * (to - dc))
    }
}

/// Lossless scenario starting at a pre-fault equilibrium.
///
/// A fault near one or two machines almost disconnects them from the rest;
/// afterwards one of their lines stays weakened. The clearing time is drawn
/// around a rough single-machine estimate of the critical clearing time so
/// both outcomes occur.
pub fn random_scenario(seed: u64) -> Scenario<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let m: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..100.0)).collect();
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = rng.gen_range(20.0..200.0);
            b[i][j] = x;
            b[j][i] = x;
        }
    }
    let delta0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let pm: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| b[i][j] * (delta0[i] - delta0[j]).sin()).sum())
        .collect();

    let k = rng.gen_range(0..n);
    let mut near = vec![k];
    if rng.gen_bool(0.5) {
        near.push((k + rng.gen_range(1..n)) % n);
    }
    let mut fault = b.clone();
    for &i in &near {
        for j in (0..n).filter(|j| !near.contains(j)) {
            let x = b[i][j] * rng.gen_range(0.0..0.1);
            fault[i][j] = x;
            fault[j][i] = x;
        }
    }
    let mut post = b.clone();
    let other = (k + rng.gen_range(1..n)) % n;
    let x = b[k][other] * rng.gen_range(0.3..1.0);
    post[k][other] = x;
    post[other][k] = x;

    // Time for the faulted machine to gain one radian under its full mismatch.
    let t_est = (2.0 * m[k] / pm[k].abs().max(1.0)).sqrt();
    let t_clear = (t_est * rng.gen_range(0.5..1.5)).clamp(0.02, 1.0);
    let net = |rows: Vec<Vec<f64>>| ReducedNetwork::lossless(SquareMatrix::from_rows(rows).unwrap());
    Scenario {
        machines: (0..n)
            .map(|i| MachineParams {
                id: i as u32 + 1,
                inertia: m[i],
                emf: 1.0,
                pm: pm[i],
            })
            .collect(),
        initial_angles: delta0,
        initial_speeds: vec![0.0; n],
        networks: NetworkStages {
            prefault: net(b),
            fault: net(fault),
            postfault: net(post),
        },
        t_clear,
        t_end: 4.0,
        dt: 1e-3,
    }
}

pub const RANDOM_SEEDS: std::ops::Range<u64> = 1000..1050;
