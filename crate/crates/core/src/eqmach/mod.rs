//! Equivalent-machine engine: group aggregation, the CR-NCR system and its
//! energy, equivalent margins, pattern search and CCT bisection.

mod cct;
mod pattern;

pub use cct::{find_cct, CctProbe, CctReport};
pub use pattern::{
    dominant_pattern, enumerate_patterns, evaluate_patterns, system_margin, GroupPattern, PatternMode,
    PatternResult, EXHAUSTIVE_LIMIT,
};

use crate::error::Result;
use crate::frames::{group_in_coi_sys, mirror_check, to_coi_sys, FrameSeries, MirrorResiduals, Track};
use crate::indmach::{decel_work, events_of, track_margin, MarginReport, SwingEvent};
use crate::model::Trajectory;
use crate::scalar::{lit, Real};

/// Synchronous-frame motion of one equivalent machine.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMotion<T> {
    pub inertia: T,
    pub delta: Vec<T>,
    pub omega: Vec<T>,
    /// Summed accelerating power of the members.
    pub p: Vec<T>,
}

/// Machine-CR and Machine-NCR of one pattern and the systems built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentSeries<T> {
    pub pattern: GroupPattern,
    pub times: Vec<T>,
    pub clear_index: usize,
    pub m_cr: T,
    pub m_ncr: T,
    pub m_sys: T,
    pub cr: GroupMotion<T>,
    pub ncr: GroupMotion<T>,
    /// Machine-CR relative to Machine-NCR, inertia `M_CR`.
    pub cr_ncr: Track<T>,
    /// Machine-CR in the COI-SYS reference.
    pub cr_sys: Track<T>,
    /// Machine-NCR in the COI-SYS reference.
    pub ncr_sys: Track<T>,
}

impl<T: Real> EquivalentSeries<T> {
    /// EDSP and EDLP events of the CR-NCR system.
    pub fn events(&self) -> Vec<SwingEvent<T>> {
        events_of(&self.times, self.clear_index, &self.cr_ncr)
    }

    pub fn mirror_residuals(&self) -> Result<MirrorResiduals<T>> {
        mirror_check(&self.cr_sys, &self.ncr_sys, &self.cr_ncr, self.m_cr, self.m_ncr, self.m_sys)
    }
}

fn group_motion<T: Real>(traj: &Trajectory<T>, members: &[usize]) -> GroupMotion<T> {
    let n = traj.len();
    // A lone member is copied as is so singleton groups reproduce it exactly.
    if let [i] = members {
        return GroupMotion {
            inertia: traj.inertia[*i],
            delta: traj.states.iter().map(|s| s.delta[*i]).collect(),
            omega: traj.states.iter().map(|s| s.omega[*i]).collect(),
            p: (0..n).map(|k| traj.accel_power(k, *i)).collect(),
        };
    }
    let m: T = members.iter().map(|&i| traj.inertia[i]).sum();
    let mean = |x: &dyn Fn(usize, usize) -> T| -> Vec<T> {
        (0..n)
            .map(|k| members.iter().map(|&i| traj.inertia[i] * x(k, i)).sum::<T>() / m)
            .collect()
    };
    GroupMotion {
        inertia: m,
        delta: mean(&|k, i| traj.states[k].delta[i]),
        omega: mean(&|k, i| traj.states[k].omega[i]),
        p: (0..n)
            .map(|k| members.iter().map(|&i| traj.accel_power(k, i)).sum())
            .collect(),
    }
}

/// Aggregates the groups of `pattern` into Machine-CR and Machine-NCR.
pub fn aggregate<T: Real>(traj: &Trajectory<T>, pattern: &GroupPattern) -> Result<EquivalentSeries<T>> {
    aggregate_in(traj, &to_coi_sys(traj), pattern)
}

/// [`aggregate`] reusing an already computed COI-SYS series of `traj`.
pub fn aggregate_in<T: Real>(
    traj: &Trajectory<T>,
    sys: &FrameSeries<T>,
    pattern: &GroupPattern,
) -> Result<EquivalentSeries<T>> {
    pattern.check_against(&traj.ids)?;
    let (cr_idx, ncr_idx) = pattern.indices(&traj.ids);
    let cr = group_motion(traj, &cr_idx);
    let ncr = group_motion(traj, &ncr_idx);
    let (m_cr, m_ncr) = (cr.inertia, ncr.inertia);
    let ratio = m_cr / m_ncr;

    let cr_ncr = Track {
        label: "CR-NCR".to_string(),
        inertia: m_cr,
        delta: cr.delta.iter().zip(&ncr.delta).map(|(&a, &b)| a - b).collect(),
        omega: cr.omega.iter().zip(&ncr.omega).map(|(&a, &b)| a - b).collect(),
        f: cr.p.iter().zip(&ncr.p).map(|(&a, &b)| a - ratio * b).collect(),
    };

    Ok(EquivalentSeries {
        pattern: pattern.clone(),
        times: traj.times.clone(),
        clear_index: traj.clear_index(),
        m_cr,
        m_ncr,
        m_sys: traj.total_inertia(),
        cr_sys: group_in_coi_sys(sys, &cr_idx, "CR-SYS"),
        ncr_sys: group_in_coi_sys(sys, &ncr_idx, "NCR-SYS"),
        cr,
        ncr,
        cr_ncr,
    })
}

/// Transient energy of the CR-NCR system over the post-fault window.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries<T> {
    /// Times from the clearing sample on.
    pub times: Vec<T>,
    pub v_ke: Vec<T>,
    /// Work done against `f` since clearing, zero at the clearing sample.
    pub v_pe: Vec<T>,
    pub v_total: Vec<T>,
}

impl<T: Real> EnergySeries<T> {
    /// Largest `|v_total - v_total(t_c)|` over the window.
    pub fn drift(&self) -> T {
        let v0 = self.v_total[0];
        self.v_total.iter().fold(T::zero(), |m, &v| m.max((v - v0).abs()))
    }
}

pub fn energy<T: Real>(eq: &EquivalentSeries<T>) -> EnergySeries<T> {
    let c = eq.clear_index;
    let track = &eq.cr_ncr;
    let half = lit::<T>(0.5);
    let v_ke: Vec<T> = track.omega[c..]
        .iter()
        .map(|&w| half * track.inertia * w * w)
        .collect();
    let v_pe = decel_work(&eq.times, c, track);
    let v_total = v_ke.iter().zip(&v_pe).map(|(&k, &p)| k + p).collect();
    EnergySeries {
        times: eq.times[c..].to_vec(),
        v_ke,
        v_pe,
        v_total,
    }
}

/// Margin of the CR-NCR system.
pub fn equivalent_margin<T: Real>(eq: &EquivalentSeries<T>) -> MarginReport<T> {
    track_margin(&eq.times, eq.clear_index, &eq.cr_ncr)
}

/// Margin of the mirror CR-SYS system; equal to [`equivalent_margin`] up to
/// numerical error.
pub fn mirror_margin<T: Real>(eq: &EquivalentSeries<T>) -> MarginReport<T> {
    track_margin(&eq.times, eq.clear_index, &eq.cr_sys)
}
