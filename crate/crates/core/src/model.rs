//! Machines, staged reduced networks, scenarios and trajectories.
//!
//! Angles are radians and speeds are rad/s deviations from synchronous speed
//! everywhere in this crate; degrees only appear in exported reports.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

pub type MachineId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct MachineParams<T> {
    pub id: MachineId,
    /// Inertia constant M_i in p.u. power * s^2 / rad.
    pub inertia: T,
    /// Internal EMF magnitude, p.u.
    pub emf: T,
    /// Mechanical input power, p.u.
    pub pm: T,
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "matrix is not square: row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            (0..i).all(|j| {
                let (a, b) = (self.get(i, j), self.get(j, i));
                (a - b).abs() <= lit::<T>(1e-12) * (T::one() + a.abs().max(b.abs()))
            })
        })
    }

    fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Classical-model network reduced to machine internal nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork<T> {
    pub conductance: SquareMatrix<T>,
    pub susceptance: SquareMatrix<T>,
}

impl<T: Real> ReducedNetwork<T> {
    pub fn lossless(susceptance: SquareMatrix<T>) -> Self {
        Self {
            conductance: SquareMatrix::zeros(susceptance.dim()),
            susceptance,
        }
    }

    pub fn dim(&self) -> usize {
        self.susceptance.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Prefault,
    Fault,
    Postfault,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Prefault => "prefault",
            Stage::Fault => "fault",
            Stage::Postfault => "postfault",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStages<T> {
    pub prefault: ReducedNetwork<T>,
    pub fault: ReducedNetwork<T>,
    pub postfault: ReducedNetwork<T>,
}

impl<T> NetworkStages<T> {
    pub fn get(&self, stage: Stage) -> &ReducedNetwork<T> {
        match stage {
            Stage::Prefault => &self.prefault,
            Stage::Fault => &self.fault,
            Stage::Postfault => &self.postfault,
        }
    }

    fn iter(&self) -> impl Iterator<Item = (Stage, &ReducedNetwork<T>)> {
        [
            (Stage::Prefault, &self.prefault),
            (Stage::Fault, &self.fault),
            (Stage::Postfault, &self.postfault),
        ]
        .into_iter()
    }
}

/// Complete input to one study: machines, initial state, three network stages and fault timing.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub machines: Vec<MachineParams<T>>,
    pub initial_angles: Vec<T>,
    pub initial_speeds: Vec<T>,
    pub networks: NetworkStages<T>,
    pub t_clear: T,
    pub t_end: T,
    pub dt: T,
}

impl<T: Real> Scenario<T> {
    pub fn n_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn ids(&self) -> Vec<MachineId> {
        self.machines.iter().map(|m| m.id).collect()
    }

    pub fn with_clearing_time(&self, t_clear: T) -> Self {
        Self {
            t_clear,
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: T) -> Self {
        Self { dt, ..self.clone() }
    }

    /// Returns the same scenario converted to another scalar type.
    pub fn cast<U: Real>(&self) -> Scenario<U> {
        let c = |x: T| lit::<U>(to_f64(x));
        let cm = |m: &SquareMatrix<T>| SquareMatrix {
            n: m.n,
            data: m.data.iter().map(|&x| c(x)).collect(),
        };
        let cn = |n: &ReducedNetwork<T>| ReducedNetwork {
            conductance: cm(&n.conductance),
            susceptance: cm(&n.susceptance),
        };
        Scenario {
            machines: self
                .machines
                .iter()
                .map(|m| MachineParams {
                    id: m.id,
                    inertia: c(m.inertia),
                    emf: c(m.emf),
                    pm: c(m.pm),
                })
                .collect(),
            initial_angles: self.initial_angles.iter().map(|&x| c(x)).collect(),
            initial_speeds: self.initial_speeds.iter().map(|&x| c(x)).collect(),
            networks: NetworkStages {
                prefault: cn(&self.networks.prefault),
                fault: cn(&self.networks.fault),
                postfault: cn(&self.networks.postfault),
            },
            t_clear: c(self.t_clear),
            t_end: c(self.t_end),
            dt: c(self.dt),
        }
    }
}

/// Per-machine electrical power injections, p.u.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerVector<T> {
    pub pe: Vec<T>,
}

/// Rotor angles and speed deviations of every machine at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState<T> {
    pub delta: Vec<T>,
    pub omega: Vec<T>,
}

/// Simulated motion of the original system in the synchronous reference.
///
/// `pe[k]` holds the electrical powers at sample `k` evaluated with the network
/// that drives the step leaving that sample, so the sample at `t_clear`
/// carries post-fault powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub ids: Vec<MachineId>,
    pub inertia: Vec<T>,
    pub pm: Vec<T>,
    pub times: Vec<T>,
    pub states: Vec<MachineState<T>>,
    pub pe: Vec<PowerVector<T>>,
    /// Sample indices where a network stage begins: `[0, clear_index]`.
    pub stage_marks: Vec<usize>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_machines(&self) -> usize {
        self.ids.len()
    }

    /// Index of the first post-fault sample.
    pub fn clear_index(&self) -> usize {
        self.stage_marks.get(1).copied().unwrap_or(0)
    }

    pub fn t_clear(&self) -> T {
        self.times[self.clear_index()]
    }

    pub fn stage_at(&self, k: usize) -> Stage {
        if k >= self.clear_index() && self.stage_marks.len() > 1 {
            Stage::Postfault
        } else {
            Stage::Fault
        }
    }

    /// Accelerating power P_mi - P_ei of machine `i` at sample `k`.
    #[inline]
    pub fn accel_power(&self, k: usize, i: usize) -> T {
        self.pm[i] - self.pe[k].pe[i]
    }

    pub fn index_of(&self, id: MachineId) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn total_inertia(&self) -> T {
        self.inertia.iter().copied().sum()
    }
}

/// Lists every violated invariant; empty when the scenario is usable.
pub fn validate<T: Real>(scenario: &Scenario<T>) -> Vec<String> {
    let mut out = Vec::new();
    let n = scenario.machines.len();
    if n == 0 {
        out.push("machines: at least one machine is required".to_string());
    }

    let mut seen = HashSet::new();
    for m in &scenario.machines {
        if !seen.insert(m.id) {
            out.push(format!("machine {}: duplicate machine id", m.id));
        }
        if !(m.inertia > T::zero()) || !m.inertia.is_finite() {
            out.push(format!("machine {}: inertia M must be > 0, got {}", m.id, m.inertia));
        }
        if !(m.emf > T::zero()) || !m.emf.is_finite() {
            out.push(format!("machine {}: emf E must be > 0, got {}", m.id, m.emf));
        }
        if !m.pm.is_finite() {
            out.push(format!("machine {}: Pm must be finite", m.id));
        }
    }

    if scenario.initial_angles.len() != n {
        out.push(format!(
            "initial_angles: dimension {} does not match machine count {n}",
            scenario.initial_angles.len()
        ));
    }
    if scenario.initial_speeds.len() != n {
        out.push(format!(
            "initial_speeds: dimension {} does not match machine count {n}",
            scenario.initial_speeds.len()
        ));
    }
    if scenario
        .initial_angles
        .iter()
        .chain(&scenario.initial_speeds)
        .any(|x| !x.is_finite())
    {
        out.push("initial state: non-finite entry".to_string());
    }

    for (stage, net) in scenario.networks.iter() {
        for (name, m) in [("G", &net.conductance), ("B", &net.susceptance)] {
            if m.dim() != n {
                out.push(format!(
                    "networks.{stage}.{name}: dimension {} does not match machine count {n}",
                    m.dim()
                ));
            }
            if !m.all_finite() {
                out.push(format!("networks.{stage}.{name}: non-finite entry"));
            }
            if !m.is_symmetric() {
                out.push(format!("networks.{stage}.{name}: matrix is not symmetric"));
            }
        }
    }

    let (tc, te, dt) = (scenario.t_clear, scenario.t_end, scenario.dt);
    if !(tc > T::zero()) {
        out.push(format!("t_clear: must be > 0, got {tc}"));
    }
    if !(tc < te) {
        out.push(format!("t_clear: must be < t_end ({tc} >= {te})"));
    }
    if !(dt > T::zero()) {
        out.push(format!("dt: must be > 0, got {dt}"));
    } else if dt > tc {
        out.push(format!("dt: must not exceed t_clear ({dt} > {tc})"));
    }
    out
}

// On-disk scenario document.

#[derive(Debug, Serialize, Deserialize)]
struct MachineDoc {
    id: MachineId,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "Pm")]
    pm: f64,
    delta0: f64,
    #[serde(default)]
    omega0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkDoc {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworksDoc {
    prefault: NetworkDoc,
    fault: NetworkDoc,
    postfault: NetworkDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct FaultDoc {
    t_clear: f64,
    t_end: f64,
    dt: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    machines: Vec<MachineDoc>,
    networks: NetworksDoc,
    fault: FaultDoc,
}

fn matrix_from_doc<T: Real>(rows: Vec<Vec<f64>>, what: &str) -> Result<SquareMatrix<T>> {
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(lit::<T>).collect())
        .collect();
    SquareMatrix::from_rows(rows).map_err(|e| match e {
        Error::Dimension(msg) => Error::Dimension(format!("{what}: {msg}")),
        other => other,
    })
}

fn network_from_doc<T: Real>(doc: NetworkDoc, stage: &str) -> Result<ReducedNetwork<T>> {
    Ok(ReducedNetwork {
        conductance: matrix_from_doc(doc.g, &format!("networks.{stage}.G"))?,
        susceptance: matrix_from_doc(doc.b, &format!("networks.{stage}.B"))?,
    })
}

fn matrix_to_doc<T: Real>(m: &SquareMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| to_f64(m.get(i, j))).collect())
        .collect()
}

/// Parses a scenario document without validating it.
pub fn parse_scenario<T: Real>(text: &str) -> Result<Scenario<T>> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let networks = NetworkStages {
        prefault: network_from_doc(doc.networks.prefault, "prefault")?,
        fault: network_from_doc(doc.networks.fault, "fault")?,
        postfault: network_from_doc(doc.networks.postfault, "postfault")?,
    };
    Ok(Scenario {
        initial_angles: doc.machines.iter().map(|m| lit(m.delta0)).collect(),
        initial_speeds: doc.machines.iter().map(|m| lit(m.omega0)).collect(),
        machines: doc
            .machines
            .iter()
            .map(|m| MachineParams {
                id: m.id,
                inertia: lit(m.m),
                emf: lit(m.e),
                pm: lit(m.pm),
            })
            .collect(),
        networks,
        t_clear: lit(doc.fault.t_clear),
        t_end: lit(doc.fault.t_end),
        dt: lit(doc.fault.dt),
    })
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario<T: Real>(path: impl AsRef<Path>) -> Result<Scenario<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let scenario = parse_scenario(&text)?;
    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn scenario_to_json<T: Real>(scenario: &Scenario<T>) -> String {
    let net = |n: &ReducedNetwork<T>| NetworkDoc {
        g: matrix_to_doc(&n.conductance),
        b: matrix_to_doc(&n.susceptance),
    };
    let doc = ScenarioDoc {
        machines: scenario
            .machines
            .iter()
            .enumerate()
            .map(|(i, m)| MachineDoc {
                id: m.id,
                m: to_f64(m.inertia),
                e: to_f64(m.emf),
                pm: to_f64(m.pm),
                delta0: scenario.initial_angles.get(i).map_or(0.0, |&x| to_f64(x)),
                omega0: scenario.initial_speeds.get(i).map_or(0.0, |&x| to_f64(x)),
            })
            .collect(),
        networks: NetworksDoc {
            prefault: net(&scenario.networks.prefault),
            fault: net(&scenario.networks.fault),
            postfault: net(&scenario.networks.postfault),
        },
        fault: FaultDoc {
            t_clear: to_f64(scenario.t_clear),
            t_end: to_f64(scenario.t_end),
            dt: to_f64(scenario.dt),
        },
    };
    serde_json::to_string_pretty(&doc).expect("scenario serializes")
}

pub fn save_scenario<T: Real>(scenario: &Scenario<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario_to_json(scenario))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{
      "machines": [
        {"id": 1, "M": 10.0, "E": 1.0, "Pm": 0.0, "delta0": 0.0, "omega0": 0.0},
        {"id": 2, "M": 2.0, "E": 1.0, "Pm": 0.0, "delta0": 0.0, "omega0": 0.0},
        {"id": 3, "M": 3.0, "E": 1.0, "Pm": 0.0, "delta0": 0.0}
      ],
      "networks": {
        "prefault":  {"G": [[0,0,0],[0,0,0],[0,0,0]], "B": [[0,1,1],[1,0,1],[1,1,0]]},
        "fault":     {"G": [[0,0,0],[0,0,0],[0,0,0]], "B": [[0,1,0],[1,0,0],[0,0,0]]},
        "postfault": {"G": [[0,0,0],[0,0,0],[0,0,0]], "B": [[0,1,1],[1,0,1],[1,1,0]]}
      },
      "fault": {"t_clear": 0.1, "t_end": 1.0, "dt": 0.001}
    }"#;

    fn three() -> Scenario<f64> {
        parse_scenario(THREE).unwrap()
    }

    #[test]
    fn parses_three_machine_document() {
        let s = three();
        assert_eq!(s.n_machines(), 3);
        assert_eq!(s.ids(), vec![1, 2, 3]);
        assert_eq!(s.networks.fault.susceptance.get(0, 1), 1.0);
        assert_eq!(s.initial_speeds, vec![0.0; 3]);
        assert!(validate(&s).is_empty());
    }

    #[test]
    fn clearing_after_end_names_t_clear() {
        let s = three().with_clearing_time(2.0);
        let v = validate(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("t_clear"));
    }

    #[test]
    fn non_square_matrix_is_dimension_error() {
        let text = THREE.replace("\"G\": [[0,0,0],[0,0,0],[0,0,0]], \"B\": [[0,1,0]", "\"G\": [[0,0,0],[0,0],[0,0,0]], \"B\": [[0,1,0]");
        match parse_scenario::<f64>(&text) {
            Err(Error::Dimension(msg)) => assert!(msg.contains("networks.fault.G"), "{msg}"),
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn zero_inertia_is_one_violation_naming_machine() {
        let mut s = three();
        s.machines[1].inertia = 0.0;
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("machine 2"));
    }

    #[test]
    fn duplicate_ids_reported_once() {
        let mut s = three();
        s.machines[2].id = 1;
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("duplicate"));
    }

    #[test]
    fn asymmetric_susceptance_rejected() {
        let mut s = three();
        s.networks.postfault.susceptance.set(0, 2, 0.5);
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("postfault.B"));
    }

    #[test]
    fn dt_larger_than_clearing_time_rejected() {
        let s = three().with_dt(0.2);
        assert!(validate(&s)[0].starts_with("dt"));
    }

    #[test]
    fn malformed_json_reports_position() {
        match parse_scenario::<f64>("{\n  \"machines\": [,]\n}") {
            Err(Error::Parse(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_parse_error() {
        let err = load_scenario::<f64>("/nonexistent/scenario.json").unwrap_err();
        assert_eq!(err.category(), crate::error::ErrorCategory::Parse);
    }

    #[test]
    fn save_then_load_preserves_every_number() {
        let mut s = three();
        s.machines[0].pm = 0.1 + 0.2;
        s.initial_angles[2] = std::f64::consts::PI / 7.0;
        s.networks.fault.conductance.set(1, 1, 1.0 / 3.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        save_scenario(&s, &path).unwrap();
        let back: Scenario<f64> = load_scenario(&path).unwrap();
        assert_eq!(back, s);
    }
}
