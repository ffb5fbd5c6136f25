//! Reference-frame transforms: synchronous, COI-SYS and COI-NCR, plus the
//! mirror identities tying the CR-SYS, NCR-SYS and CR-NCR systems together.

use std::fmt;

use crate::eqmach::GroupPattern;
use crate::error::{Error, Result};
use crate::model::Trajectory;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameTag {
    Synchronous,
    CoiSys,
    CoiNcr(GroupPattern),
}

impl fmt::Display for FrameTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameTag::Synchronous => f.write_str("SYN"),
            FrameTag::CoiSys => f.write_str("COI-SYS"),
            FrameTag::CoiNcr(p) => write!(f, "COI-NCR({p})"),
        }
    }
}

/// Motion of one subject (a machine or an equivalent machine) in some frame.
///
/// Within a frame `d(delta)/dt = omega` and `inertia * d(omega)/dt = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<T> {
    pub label: String,
    pub inertia: T,
    pub delta: Vec<T>,
    pub omega: Vec<T>,
    pub f: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries<T> {
    pub tag: FrameTag,
    pub times: Vec<T>,
    /// First post-fault sample.
    pub clear_index: usize,
    pub tracks: Vec<Track<T>>,
}

impl<T: Real> FrameSeries<T> {
    pub fn track(&self, label: &str) -> Option<&Track<T>> {
        self.tracks.iter().find(|t| t.label == label)
    }

    pub fn t_clear(&self) -> T {
        self.times[self.clear_index]
    }
}

pub fn machine_label(id: u32) -> String {
    format!("machine {id}")
}

/// Raw synchronous-reference series with `f_i = Pm_i - Pe_i`.
pub fn synchronous<T: Real>(traj: &Trajectory<T>) -> FrameSeries<T> {
    let tracks = (0..traj.n_machines())
        .map(|i| Track {
            label: machine_label(traj.ids[i]),
            inertia: traj.inertia[i],
            delta: traj.states.iter().map(|s| s.delta[i]).collect(),
            omega: traj.states.iter().map(|s| s.omega[i]).collect(),
            f: (0..traj.len()).map(|k| traj.accel_power(k, i)).collect(),
        })
        .collect();
    FrameSeries {
        tag: FrameTag::Synchronous,
        times: traj.times.clone(),
        clear_index: traj.clear_index(),
        tracks,
    }
}

/// Per-sample system centre of inertia `(delta_SYS, omega_SYS, P_SYS)`.
pub fn system_coi<T: Real>(traj: &Trajectory<T>) -> Vec<(T, T, T)> {
    let m_sys = traj.total_inertia();
    (0..traj.len())
        .map(|k| {
            let s = &traj.states[k];
            let mut d = T::zero();
            let mut w = T::zero();
            let mut p = T::zero();
            for i in 0..traj.n_machines() {
                d = d + traj.inertia[i] * s.delta[i];
                w = w + traj.inertia[i] * s.omega[i];
                p = p + traj.accel_power(k, i);
            }
            (d / m_sys, w / m_sys, p)
        })
        .collect()
}

/// Machine motion relative to the system COI:
/// `delta_i-SYS = delta_i - delta_SYS`, `f_i-SYS = (Pm_i - Pe_i) - (M_i / M_SYS) P_SYS`.
pub fn to_coi_sys<T: Real>(traj: &Trajectory<T>) -> FrameSeries<T> {
    let coi = system_coi(traj);
    let m_sys = traj.total_inertia();
    let tracks = (0..traj.n_machines())
        .map(|i| {
            let share = traj.inertia[i] / m_sys;
            Track {
                label: machine_label(traj.ids[i]),
                inertia: traj.inertia[i],
                delta: traj
                    .states
                    .iter()
                    .zip(&coi)
                    .map(|(s, c)| s.delta[i] - c.0)
                    .collect(),
                omega: traj
                    .states
                    .iter()
                    .zip(&coi)
                    .map(|(s, c)| s.omega[i] - c.1)
                    .collect(),
                f: (0..traj.len())
                    .map(|k| traj.accel_power(k, i) - share * coi[k].2)
                    .collect(),
            }
        })
        .collect();
    FrameSeries {
        tag: FrameTag::CoiSys,
        times: traj.times.clone(),
        clear_index: traj.clear_index(),
        tracks,
    }
}

/// Equivalent machine of a group in the COI-SYS reference, built from the
/// members' COI-SYS tracks: mass-weighted angle and speed, summed `f`.
pub fn group_in_coi_sys<T: Real>(sys: &FrameSeries<T>, members: &[usize], label: &str) -> Track<T> {
    let m: T = members.iter().map(|&i| sys.tracks[i].inertia).sum();
    let n = sys.times.len();
    let weighted = |pick: fn(&Track<T>) -> &Vec<T>| -> Vec<T> {
        (0..n)
            .map(|k| {
                members
                    .iter()
                    .map(|&i| sys.tracks[i].inertia * pick(&sys.tracks[i])[k])
                    .sum::<T>()
                    / m
            })
            .collect()
    };
    Track {
        label: label.to_string(),
        inertia: m,
        delta: weighted(|t| &t.delta),
        omega: weighted(|t| &t.omega),
        f: (0..n)
            .map(|k| members.iter().map(|&i| sys.tracks[i].f[k]).sum())
            .collect(),
    }
}

/// Machine-CR relative to Machine-NCR as a single-track series.
pub fn to_coi_ncr<T: Real>(traj: &Trajectory<T>, pattern: &GroupPattern) -> Result<FrameSeries<T>> {
    let eq = crate::eqmach::aggregate(traj, pattern)?;
    Ok(FrameSeries {
        tag: FrameTag::CoiNcr(pattern.clone()),
        times: eq.times,
        clear_index: eq.clear_index,
        tracks: vec![eq.cr_ncr],
    })
}

/// Largest per-sample violation of each mirror identity.
///
/// Order: `M_CR d_CR-SYS + M_NCR d_NCR-SYS`, the same for omega,
/// `f_CR-SYS + f_NCR-SYS`, `M_NCR d_CR-NCR - M_SYS d_CR-SYS`, the same for
/// omega, and `M_NCR f_CR-NCR - M_SYS f_CR-SYS`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorResiduals<T> {
    pub absolute: [T; 6],
    /// Magnitudes the residuals are compared against (never below unit
    /// magnitude times the masses involved).
    pub scale: [T; 6],
}

impl<T: Real> MirrorResiduals<T> {
    pub fn relative(&self) -> [T; 6] {
        let mut out = [T::zero(); 6];
        for i in 0..6 {
            out[i] = self.absolute[i] / self.scale[i];
        }
        out
    }

    pub fn max_relative(&self) -> T {
        self.relative().into_iter().fold(T::zero(), T::max)
    }
}

pub const MIRROR_LABELS: [&str; 6] = [
    "M_CR*delta_CR-SYS + M_NCR*delta_NCR-SYS",
    "M_CR*omega_CR-SYS + M_NCR*omega_NCR-SYS",
    "f_CR-SYS + f_NCR-SYS",
    "M_NCR*delta_CR-NCR - M_SYS*delta_CR-SYS",
    "M_NCR*omega_CR-NCR - M_SYS*omega_CR-SYS",
    "M_NCR*f_CR-NCR - M_SYS*f_CR-SYS",
];

pub fn mirror_check<T: Real>(
    cr_sys: &Track<T>,
    ncr_sys: &Track<T>,
    cr_ncr: &Track<T>,
    m_cr: T,
    m_ncr: T,
    m_sys: T,
) -> Result<MirrorResiduals<T>> {
    if (m_sys - (m_cr + m_ncr)).abs() > lit::<T>(1e-12) * m_sys.abs().max(T::one()) {
        return Err(Error::MassInconsistency(format!(
            "M_SYS = {m_sys} but M_CR + M_NCR = {}",
            m_cr + m_ncr
        )));
    }
    let n = cr_sys.delta.len();
    if ncr_sys.delta.len() != n || cr_ncr.delta.len() != n {
        return Err(Error::Dimension("mirror series are not aligned".into()));
    }

    let mut abs = [T::zero(); 6];
    let mut mag = [T::zero(); 3];
    for k in 0..n {
        let r = [
            m_cr * cr_sys.delta[k] + m_ncr * ncr_sys.delta[k],
            m_cr * cr_sys.omega[k] + m_ncr * ncr_sys.omega[k],
            cr_sys.f[k] + ncr_sys.f[k],
            m_ncr * cr_ncr.delta[k] - m_sys * cr_sys.delta[k],
            m_ncr * cr_ncr.omega[k] - m_sys * cr_sys.omega[k],
            m_ncr * cr_ncr.f[k] - m_sys * cr_sys.f[k],
        ];
        for i in 0..6 {
            abs[i] = abs[i].max(r[i].abs());
        }
        let peak = |a: T, b: T, c: T| a.abs().max(b.abs()).max(c.abs());
        mag[0] = mag[0].max(peak(cr_sys.delta[k], ncr_sys.delta[k], cr_ncr.delta[k]));
        mag[1] = mag[1].max(peak(cr_sys.omega[k], ncr_sys.omega[k], cr_ncr.omega[k]));
        mag[2] = mag[2].max(peak(cr_sys.f[k], ncr_sys.f[k], cr_ncr.f[k]));
    }
    let one = T::one();
    let scale = [
        m_sys * mag[0].max(one),
        m_sys * mag[1].max(one),
        mag[2].max(one),
        m_sys * mag[0].max(one),
        m_sys * mag[1].max(one),
        m_sys * mag[2].max(one),
    ];
    Ok(MirrorResiduals {
        absolute: abs,
        scale,
    })
}
