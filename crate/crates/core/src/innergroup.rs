//! Motion of the real machines about their own group's equivalent machine.

use std::f64::consts::PI;
use std::fmt;

use crate::eqmach::EquivalentSeries;
use crate::error::Result;
use crate::model::{MachineId, Trajectory};
use crate::scalar::{lit, Real};

/// Default fierceness threshold on the largest inner-group excursion, rad.
pub const DEFAULT_FIERCE_THRESHOLD: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Critical,
    NonCritical,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Critical => "CR",
            Group::NonCritical => "NCR",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerMotion<T> {
    pub id: MachineId,
    pub group: Group,
    pub inertia: T,
    /// `delta_i - delta_CR` or `delta_j - delta_NCR` per sample.
    pub delta: Vec<T>,
    pub max_abs_excursion: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerMotionSeries<T> {
    pub times: Vec<T>,
    pub members: Vec<InnerMotion<T>>,
}

pub fn inner_motion<T: Real>(traj: &Trajectory<T>, eq: &EquivalentSeries<T>) -> Result<InnerMotionSeries<T>> {
    eq.pattern.check_against(&traj.ids)?;
    let (cr, ncr) = eq.pattern.indices(&traj.ids);
    let side = |idx: &[usize], group: Group, center: &[T]| -> Vec<InnerMotion<T>> {
        idx.iter()
            .map(|&i| {
                let delta: Vec<T> = traj
                    .states
                    .iter()
                    .zip(center)
                    .map(|(s, &c)| s.delta[i] - c)
                    .collect();
                let max_abs_excursion = delta.iter().fold(T::zero(), |m, &d| m.max(d.abs()));
                InnerMotion {
                    id: traj.ids[i],
                    group,
                    inertia: traj.inertia[i],
                    delta,
                    max_abs_excursion,
                }
            })
            .collect()
    };
    let mut members = side(&cr, Group::Critical, &eq.cr.delta);
    members.extend(side(&ncr, Group::NonCritical, &eq.ncr.delta));
    Ok(InnerMotionSeries {
        times: traj.times.clone(),
        members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fierceness {
    Slight,
    Fierce,
}

impl fmt::Display for Fierceness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fierceness::Slight => "slight",
            Fierceness::Fierce => "fierce",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiercenessReport<T> {
    pub threshold: T,
    pub critical: Fierceness,
    pub non_critical: Fierceness,
    /// Whether the equivalent-system severity may stand in for the original one.
    pub severity_trust: bool,
    /// Largest excursion and the machine reaching it.
    pub worst: Option<(MachineId, T)>,
}

/// A group is fierce once any member's excursion reaches `threshold`.
pub fn classify_fierceness<T: Real>(series: &InnerMotionSeries<T>, threshold: T) -> FiercenessReport<T> {
    let group = |g: Group| {
        if series
            .members
            .iter()
            .any(|m| m.group == g && m.max_abs_excursion >= threshold)
        {
            Fierceness::Fierce
        } else {
            Fierceness::Slight
        }
    };
    let (critical, non_critical) = (group(Group::Critical), group(Group::NonCritical));
    let worst = series
        .members
        .iter()
        .fold(None, |best: Option<(MachineId, T)>, m| match best {
            Some((_, x)) if x >= m.max_abs_excursion => best,
            _ => Some((m.id, m.max_abs_excursion)),
        });
    FiercenessReport {
        threshold,
        critical,
        non_critical,
        severity_trust: critical == Fierceness::Slight && non_critical == Fierceness::Slight,
        worst,
    }
}

pub fn classify_default<T: Real>(series: &InnerMotionSeries<T>) -> FiercenessReport<T> {
    classify_fierceness(series, lit(DEFAULT_FIERCE_THRESHOLD))
}
