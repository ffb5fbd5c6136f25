use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{to_coi_sys, FrameSeries};
use crate::indmach::{MarginReport, SwingEvent, Verdict, MONITOR_FRACTION};
use crate::model::{MachineId, Trajectory};
use crate::scalar::{lit, Real};

use super::{aggregate_in, equivalent_margin};

/// Largest system the exhaustive enumeration accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Bipartition of the machines into a critical and a non-critical group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupPattern {
    critical: Vec<MachineId>,
    non_critical: Vec<MachineId>,
}

impl GroupPattern {
    pub fn new(
        critical: impl IntoIterator<Item = MachineId>,
        non_critical: impl IntoIterator<Item = MachineId>,
    ) -> Result<Self> {
        let cr: BTreeSet<MachineId> = critical.into_iter().collect();
        let ncr: BTreeSet<MachineId> = non_critical.into_iter().collect();
        if cr.is_empty() || ncr.is_empty() {
            return Err(Error::InvalidPattern("both groups must be non-empty".into()));
        }
        if let Some(id) = cr.intersection(&ncr).next() {
            return Err(Error::InvalidPattern(format!("machine {id} is in both groups")));
        }
        Ok(Self {
            critical: cr.into_iter().collect(),
            non_critical: ncr.into_iter().collect(),
        })
    }

    /// Pattern whose non-critical group is every machine of `all` not in `critical`.
    pub fn from_critical(critical: &[MachineId], all: &[MachineId]) -> Result<Self> {
        if let Some(id) = critical.iter().find(|id| !all.contains(id)) {
            return Err(Error::InvalidPattern(format!("unknown machine {id}")));
        }
        Self::new(
            critical.iter().copied(),
            all.iter().copied().filter(|id| !critical.contains(id)),
        )
    }

    pub fn critical(&self) -> &[MachineId] {
        &self.critical
    }

    pub fn non_critical(&self) -> &[MachineId] {
        &self.non_critical
    }

    /// Checks the pattern covers exactly the machines of `ids`.
    pub fn check_against(&self, ids: &[MachineId]) -> Result<()> {
        let all: BTreeSet<MachineId> = ids.iter().copied().collect();
        let mine: BTreeSet<MachineId> = self.critical.iter().chain(&self.non_critical).copied().collect();
        if all != mine {
            return Err(Error::InvalidPattern(format!(
                "pattern {self} does not partition machines {ids:?}"
            )));
        }
        Ok(())
    }

    pub(crate) fn indices(&self, ids: &[MachineId]) -> (Vec<usize>, Vec<usize>) {
        let pos = |id: &MachineId| ids.iter().position(|x| x == id).expect("checked pattern");
        (
            self.critical.iter().map(pos).collect(),
            self.non_critical.iter().map(pos).collect(),
        )
    }
}

impl fmt::Display for GroupPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[MachineId]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(&self.critical), join(&self.non_critical))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternMode {
    /// The n-1 prefix cuts of the machines ranked by COI-SYS angle.
    AngleCuts,
    /// Every bipartition.
    Exhaustive,
}

/// Sample with the largest COI-SYS angle spread across machines.
fn max_spread_sample<T: Real>(sys: &FrameSeries<T>) -> usize {
    let mut best = (0, T::neg_infinity());
    for k in 0..sys.times.len() {
        let (lo, hi) = sys.tracks.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), t| {
            (lo.min(t.delta[k]), hi.max(t.delta[k]))
        });
        if hi - lo > best.1 {
            best = (k, hi - lo);
        }
    }
    best.0
}

/// Candidate group-separation patterns for a trajectory.
///
/// The critical group is always the side with the larger mass-weighted
/// COI-SYS angle at the sample of maximum angular spread.
pub fn enumerate_patterns<T: Real>(traj: &Trajectory<T>, mode: PatternMode) -> Result<Vec<GroupPattern>> {
    let n = traj.n_machines();
    if n < 2 {
        return Err(Error::InvalidPattern(format!("need at least 2 machines, got {n}")));
    }
    let sys = to_coi_sys(traj);
    let k = max_spread_sample(&sys);
    let angle = |i: usize| sys.tracks[i].delta[k];

    match mode {
        PatternMode::AngleCuts => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                angle(b)
                    .partial_cmp(&angle(a))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(traj.ids[a].cmp(&traj.ids[b]))
            });
            (1..n)
                .map(|cut| {
                    GroupPattern::new(
                        order[..cut].iter().map(|&i| traj.ids[i]),
                        order[cut..].iter().map(|&i| traj.ids[i]),
                    )
                })
                .collect()
        }
        PatternMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::TooManyMachines {
                    n,
                    max: EXHAUSTIVE_LIMIT,
                });
            }
            let weighted = |set: &[usize]| {
                let m: T = set.iter().map(|&i| traj.inertia[i]).sum();
                set.iter().map(|&i| traj.inertia[i] * angle(i)).sum::<T>() / m
            };
            // Masks that leave the last machine out enumerate each bipartition once.
            let mut out = Vec::with_capacity((1usize << (n - 1)) - 1);
            for mask in 1u32..(1u32 << (n - 1)) {
                let a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
                let b: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
                let (cr, ncr) = if weighted(&a) >= weighted(&b) { (a, b) } else { (b, a) };
                out.push(GroupPattern::new(
                    cr.iter().map(|&i| traj.ids[i]),
                    ncr.iter().map(|&i| traj.ids[i]),
                )?);
            }
            Ok(out)
        }
    }
}

/// Equivalent-machine assessment of one candidate pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternResult<T> {
    pub pattern: GroupPattern,
    pub margin: MarginReport<T>,
    pub events: Vec<SwingEvent<T>>,
    /// Largest post-clearing `|delta_CR-NCR - delta_CR-NCR(t_c)|`.
    pub max_excursion: T,
    /// Kinetic energy of Machine-CR in the COI-SYS reference at clearing.
    pub sys_kinetic: T,
}

/// Evaluates every pattern against one trajectory; `threads` > 1 spreads the
/// work over a dedicated pool. Output order always follows `patterns`.
pub fn evaluate_patterns<T: Real>(
    traj: &Trajectory<T>,
    patterns: &[GroupPattern],
    threads: usize,
) -> Result<Vec<PatternResult<T>>> {
    let sys = to_coi_sys(traj);
    let one = |p: &GroupPattern| -> Result<PatternResult<T>> {
        let eq = aggregate_in(traj, &sys, p)?;
        let margin = equivalent_margin(&eq);
        let events = eq.events();
        let c = eq.clear_index;
        let d0 = eq.cr_ncr.delta[c];
        let max_excursion = eq.cr_ncr.delta[c..]
            .iter()
            .fold(T::zero(), |m, &d| m.max((d - d0).abs()));
        let w = eq.cr_sys.omega[c];
        Ok(PatternResult {
            pattern: p.clone(),
            margin,
            events,
            max_excursion,
            sys_kinetic: lit::<T>(0.5) * eq.m_cr * w * w,
        })
    };
    if threads > 1 && patterns.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Empty(format!("thread pool: {e}")))?;
        pool.install(|| patterns.par_iter().map(one).collect())
    } else {
        patterns.iter().map(one).collect()
    }
}

/// Ranking class: determinate margins dominate undetermined ones, which in
/// turn dominate groups that gained next to no energy during the fault.
fn rank_class<T: Real>(r: &PatternResult<T>, floor: T) -> u8 {
    if r.margin.eta.is_infinite() || r.sys_kinetic <= floor {
        2
    } else if !r.margin.verdict.is_determinate() {
        1
    } else {
        0
    }
}

/// Pattern with the lowest margin; its margin is the system margin.
///
/// Only patterns whose Machine-CR kinetic energy at clearing (COI-SYS
/// reference) exceeds [`MONITOR_FRACTION`] of the largest one compete, the
/// same rule that picks the monitored machines.
/// Ties go to the smaller critical group, then to the lexicographically
/// smaller id list.
pub fn dominant_pattern<T: Real>(results: &[PatternResult<T>]) -> Result<&PatternResult<T>> {
    let max = results.iter().map(|r| r.sys_kinetic).fold(T::zero(), T::max);
    let floor = lit::<T>(MONITOR_FRACTION) * max;
    results
        .iter()
        .min_by(|a, b| {
            let key = |r: &PatternResult<T>| match rank_class(r, floor) {
                1 => -r.max_excursion,
                _ => r.margin.eta,
            };
            rank_class(a, floor)
                .cmp(&rank_class(b, floor))
                .then(key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.pattern.critical().len().cmp(&b.pattern.critical().len()))
                .then(a.pattern.critical().cmp(b.pattern.critical()))
        })
        .ok_or_else(|| Error::Empty("no candidate patterns".into()))
}

/// Verdict and margin of the dominant pattern.
pub fn system_margin<T: Real>(results: &[PatternResult<T>]) -> Result<(Verdict, T)> {
    let d = dominant_pattern(results)?;
    Ok((d.margin.verdict, d.margin.eta))
}
