use crate::error::{Error, Result};
use crate::indmach::Verdict;
use crate::model::Scenario;
use crate::scalar::{lit, Real};
use crate::sim::simulate;

use super::{dominant_pattern, enumerate_patterns, evaluate_patterns, GroupPattern, PatternMode};

/// One bisection probe: the dominant-pattern verdict at a clearing time.
#[derive(Debug, Clone, PartialEq)]
pub struct CctProbe<T> {
    pub t_clear: T,
    pub verdict: Verdict,
    pub eta: T,
    pub pattern: GroupPattern,
}

impl<T: Real> CctProbe<T> {
    /// Stable, or critical on the non-negative side. A probe whose horizon
    /// ends before any event also counts, since nothing liberated.
    pub fn is_stable_side(&self) -> bool {
        match self.verdict {
            Verdict::Stable | Verdict::UndeterminedHorizon => true,
            Verdict::Critical => self.eta >= T::zero(),
            Verdict::Unstable => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CctReport<T> {
    /// Midpoint of the final bracket.
    pub cct: T,
    /// Last clearing time found stable.
    pub t_lo: T,
    /// First clearing time found unstable.
    pub t_hi: T,
    /// Every probe in evaluation order, the two endpoints first.
    pub probes: Vec<CctProbe<T>>,
}

pub(crate) fn probe<T: Real>(
    scenario: &Scenario<T>,
    t_clear: T,
    mode: PatternMode,
    threads: usize,
) -> Result<CctProbe<T>> {
    let traj = simulate(&scenario.with_clearing_time(t_clear))?;
    let patterns = enumerate_patterns(&traj, mode)?;
    let results = evaluate_patterns(&traj, &patterns, threads)?;
    let d = dominant_pattern(&results)?;
    Ok(CctProbe {
        t_clear,
        verdict: d.margin.verdict,
        eta: d.margin.eta,
        pattern: d.pattern.clone(),
    })
}

/// Bisects the clearing time between a stable `t_lo` and an unstable `t_hi`
/// until the bracket is no wider than `tol`.
pub fn find_cct<T: Real>(
    scenario: &Scenario<T>,
    t_lo: T,
    t_hi: T,
    tol: T,
    mode: PatternMode,
    threads: usize,
) -> Result<CctReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Bracket(format!("tolerance must be positive, got {tol}")));
    }
    if !(t_lo < t_hi) {
        return Err(Error::Bracket(format!("t_lo = {t_lo} is not below t_hi = {t_hi}")));
    }
    let lo = probe(scenario, t_lo, mode, threads)?;
    let hi = probe(scenario, t_hi, mode, threads)?;
    if !lo.is_stable_side() || hi.is_stable_side() {
        return Err(Error::Bracket(format!(
            "need stable at t_lo and unstable at t_hi; t_lo = {t_lo}: {} (eta {}), t_hi = {t_hi}: {} (eta {})",
            lo.verdict, lo.eta, hi.verdict, hi.eta
        )));
    }
    let (mut a, mut b) = (t_lo, t_hi);
    let mut probes = vec![lo, hi];
    let half = lit::<T>(0.5);
    while b - a > tol {
        let mid = half * (a + b);
        let p = probe(scenario, mid, mode, threads)?;
        if p.is_stable_side() {
            a = mid;
        } else {
            b = mid;
        }
        probes.push(p);
    }
    Ok(CctReport {
        cct: half * (a + b),
        t_lo: a,
        t_hi: b,
        probes,
    })
}
