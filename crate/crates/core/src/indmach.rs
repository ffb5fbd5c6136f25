//! Individual-machine analysis: swing events, equal-area margins and the
//! unity-principle system verdict.
//!
//! The same routines serve equivalent machines: anything with a [`Track`]
//! obeying `d(delta)/dt = omega`, `M d(omega)/dt = f` can be assessed.

use std::fmt;

use crate::error::{Error, Result};
use crate::frames::{FrameSeries, Track};
use crate::quad;
use crate::scalar::{lit, zero_fraction, Real};

/// Margins with `|eta|` below this are reported as critical.
pub const CRITICAL_BAND: f64 = 1e-3;

/// Share of the largest clearing kinetic energy a machine needs to be monitored.
pub const MONITOR_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Speed crosses zero: the swing turns back.
    Dsp,
    /// Accelerating power crosses zero towards re-acceleration: the swing is lost.
    Dlp,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Dsp => "DSP",
            EventKind::Dlp => "DLP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwingEvent<T> {
    pub kind: EventKind,
    pub subject: String,
    /// Linearly interpolated between the bracketing samples.
    pub time: T,
    pub angle: T,
    pub omega: T,
    pub f: T,
    /// 1 for the first swing after clearing, incremented by every DSP.
    pub swing_index: usize,
    /// Left sample of the bracketing interval.
    pub sample: usize,
    /// A DSP and a DLP of the same subject share the bracketing interval.
    pub coincident: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    Critical,
    Unstable,
    /// No terminating event before the end of the simulation.
    UndeterminedHorizon,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Critical => "critical",
            Verdict::Unstable => "unstable",
            Verdict::UndeterminedHorizon => "undetermined-horizon",
        })
    }
}

impl Verdict {
    pub fn is_determinate(self) -> bool {
        self != Verdict::UndeterminedHorizon
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport<T> {
    pub subject: String,
    /// Kinetic energy at clearing, `0.5 M omega_c^2`.
    pub a_acc: T,
    /// Deceleration area traversed from clearing to the terminating event.
    pub a_dec: T,
    /// Deceleration area still available beyond a DSP, estimated from the
    /// post-fault Kimbark curve; zero when a DLP terminates the swing.
    pub a_dec_reserve: T,
    pub residual_ke: T,
    /// `(a_dec + a_dec_reserve - a_acc) / a_acc`; `+inf` when `a_acc == 0`.
    pub eta: T,
    pub verdict: Verdict,
    pub terminating: Option<SwingEvent<T>>,
}

/// Ratio form of the margin.
pub fn eta_from_areas<T: Real>(a_acc: T, a_dec: T) -> T {
    if a_acc > T::zero() {
        (a_dec - a_acc) / a_acc
    } else {
        T::infinity()
    }
}

/// Verdict for a margin closed by `kind`.
pub fn classify<T: Real>(eta: T, kind: EventKind) -> Verdict {
    if eta.abs() < lit(CRITICAL_BAND) {
        Verdict::Critical
    } else {
        match kind {
            EventKind::Dsp => Verdict::Stable,
            EventKind::Dlp => Verdict::Unstable,
        }
    }
}

fn interpolate<T: Real>(
    kind: EventKind,
    label: &str,
    times: &[T],
    track: &Track<T>,
    k: usize,
    s: T,
) -> SwingEvent<T> {
    let lerp = |v: &[T]| v[k] + s * (v[k + 1] - v[k]);
    SwingEvent {
        kind,
        subject: label.to_string(),
        time: lerp(times),
        angle: lerp(&track.delta),
        omega: lerp(&track.omega),
        f: lerp(&track.f),
        swing_index: 0,
        sample: k,
        coincident: false,
    }
}

fn crosses<T: Real>(a: T, b: T) -> bool {
    (a > T::zero() && b <= T::zero()) || (a < T::zero() && b >= T::zero())
}

pub(crate) fn dsp_events<T: Real>(times: &[T], clear: usize, track: &Track<T>) -> Vec<SwingEvent<T>> {
    let w = &track.omega;
    let mut out = Vec::new();
    for k in clear..times.len().saturating_sub(1) {
        if crosses(w[k], w[k + 1]) {
            let mut ev = interpolate(EventKind::Dsp, &track.label, times, track, k, zero_fraction(w[k], w[k + 1]));
            ev.swing_index = out.len() + 1;
            out.push(ev);
        }
    }
    out
}

pub(crate) fn dlp_events<T: Real>(times: &[T], clear: usize, track: &Track<T>) -> Vec<SwingEvent<T>> {
    let f = &track.f;
    let dsps = dsp_events(times, clear, track);
    let mut out = Vec::new();
    for k in clear..times.len().saturating_sub(1) {
        if !crosses(f[k], f[k + 1]) {
            continue;
        }
        let ev = interpolate(EventKind::Dlp, &track.label, times, track, k, zero_fraction(f[k], f[k + 1]));
        // Re-acceleration in the direction of motion.
        let away = (f[k] < T::zero() && ev.omega > T::zero()) || (f[k] > T::zero() && ev.omega < T::zero());
        if away {
            let swing = 1 + dsps.iter().filter(|d| d.time <= ev.time).count();
            let coincident = dsps.iter().any(|d| d.sample == k);
            out.push(SwingEvent {
                swing_index: swing,
                coincident,
                ..ev
            });
        }
    }
    out
}

/// Zero crossings of the subject's speed after clearing.
pub fn detect_dsp<T: Real>(series: &FrameSeries<T>, subject: usize) -> Vec<SwingEvent<T>> {
    let track = &series.tracks[subject];
    let dlps = dlp_events(&series.times, series.clear_index, track);
    dsp_events(&series.times, series.clear_index, track)
        .into_iter()
        .map(|mut e| {
            e.coincident = dlps.iter().any(|d| d.sample == e.sample);
            e
        })
        .collect()
}

/// Post-clearing points where `f` changes sign so that it pushes the subject
/// further along its current direction of motion.
pub fn detect_dlp<T: Real>(series: &FrameSeries<T>, subject: usize) -> Vec<SwingEvent<T>> {
    dlp_events(&series.times, series.clear_index, &series.tracks[subject])
}

/// All DSP and DLP events of a track in time order.
pub(crate) fn events_of<T: Real>(times: &[T], clear: usize, track: &Track<T>) -> Vec<SwingEvent<T>> {
    let dlps = dlp_events(times, clear, track);
    let mut all: Vec<SwingEvent<T>> = dsp_events(times, clear, track)
        .into_iter()
        .map(|mut e| {
            e.coincident = dlps.iter().any(|d| d.sample == e.sample);
            e
        })
        .collect();
    all.extend(dlps);
    all.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap_or(std::cmp::Ordering::Equal));
    all
}

/// Cumulative `integral of -f d(delta)` from the clearing sample, evaluated
/// as `integral of -f omega dt`; entry `j` is sample `clear + j`.
pub(crate) fn decel_work<T: Real>(times: &[T], clear: usize, track: &Track<T>) -> Vec<T> {
    let q: Vec<T> = track.f.iter().zip(&track.omega).map(|(&f, &w)| -f * w).collect();
    quad::cumulative(times, &q, clear, times.len() - 1)
}

fn work_until<T: Real>(times: &[T], clear: usize, track: &Track<T>, cum: &[T], ev: &SwingEvent<T>) -> T {
    let q: Vec<T> = track.f.iter().zip(&track.omega).map(|(&f, &w)| -f * w).collect();
    let k = ev.sample;
    cum[k - clear] + quad::partial(times, &q, clear, times.len() - 1, k, ev.time)
}

/// Solves a 3x3 linear system by Gaussian elimination with partial pivoting.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..3 {
            let m = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] = a[r][c] - m * a[col][c];
            }
            b[r] = b[r] - m * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for c in (r + 1)..3 {
            s = s - a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Area between the Kimbark curve and zero beyond the return point, from a
/// least-squares parabola through the second half of the forward path.
///
/// `path` holds `(delta, f)` from clearing to the DSP, oriented so the
/// swing moves towards increasing angle.
pub(crate) fn reserve_beyond_return<T: Real>(path: &[(T, T)]) -> T {
    let Some(&(x_r, _)) = path.last() else {
        return T::zero();
    };
    let x_c = path[0].0;
    let span = x_r - x_c;
    if !(span > T::zero()) {
        return T::zero();
    }
    let cut = x_c + lit::<T>(0.5) * span;
    let pts: Vec<(T, T)> = path.iter().copied().filter(|p| p.0 >= cut).collect();
    let pts = if pts.len() >= 3 { pts } else { path.to_vec() };
    if pts.len() < 3 {
        return T::zero();
    }

    // y = a u^2 + b u + c with u = x - x_r.
    let mut s = [T::zero(); 5];
    let mut t = [T::zero(); 3];
    for &(x, y) in &pts {
        let u = (x - x_r) / span;
        let mut p = T::one();
        for (i, si) in s.iter_mut().enumerate() {
            *si = *si + p;
            if i < 3 {
                t[i] = t[i] + p * y;
            }
            p = p * u;
        }
    }
    let normal = [[s[4], s[3], s[2]], [s[3], s[2], s[1]], [s[2], s[1], s[0]]];
    let Some([a, b, c]) = solve3(normal, [t[2], t[1], t[0]]) else {
        return T::zero();
    };
    // Coefficients are in units of the traversed span.
    if c >= T::zero() {
        return T::zero();
    }
    let two = lit::<T>(2.0);
    let linear = a.abs() <= lit::<T>(1e-9) * (b.abs() + c.abs());
    let root = if linear {
        (b > T::zero()).then(|| -c / b)
    } else {
        let disc = b * b - lit::<T>(4.0) * a * c;
        if disc < T::zero() {
            None
        } else {
            let sq = disc.sqrt();
            [(-b - sq) / (two * a), (-b + sq) / (two * a)]
                .into_iter()
                .filter(|&u| u > T::zero())
                .fold(None, |m: Option<T>, u| Some(m.map_or(u, |m: T| m.min(u))))
        }
    };
    // Without a root, stop at the curve's closest approach to zero, and never
    // extrapolate further than the traversed span.
    let upper = root.unwrap_or_else(|| {
        let vertex = if linear { -T::one() } else { -b / (two * a) };
        if vertex > T::zero() {
            vertex.min(T::one())
        } else {
            T::one()
        }
    });
    let three = lit::<T>(3.0);
    -span * (a * upper * upper * upper / three + b * upper * upper / two + c * upper)
}

/// Margin of one track closed by its first post-clearing DSP or DLP.
pub(crate) fn track_margin<T: Real>(times: &[T], clear: usize, track: &Track<T>) -> MarginReport<T> {
    let half = lit::<T>(0.5);
    let w_c = track.omega[clear];
    let a_acc = half * track.inertia * w_c * w_c;
    let events = events_of(times, clear, track);
    let terminating = events.into_iter().next();

    if a_acc == T::zero() {
        return MarginReport {
            subject: track.label.clone(),
            a_acc,
            a_dec: T::zero(),
            a_dec_reserve: T::zero(),
            residual_ke: T::zero(),
            eta: T::infinity(),
            verdict: Verdict::Stable,
            terminating,
        };
    }

    let cum = decel_work(times, clear, track);
    let Some(ev) = terminating else {
        let a_dec = *cum.last().unwrap();
        return MarginReport {
            subject: track.label.clone(),
            a_acc,
            a_dec,
            a_dec_reserve: T::zero(),
            residual_ke: a_acc - a_dec,
            eta: eta_from_areas(a_acc, a_dec),
            verdict: Verdict::UndeterminedHorizon,
            terminating: None,
        };
    };

    let a_dec = work_until(times, clear, track, &cum, &ev);
    let reserve = if ev.kind == EventKind::Dsp {
        let dir = w_c.signum();
        let mut path: Vec<(T, T)> = (clear..=ev.sample)
            .map(|k| (dir * track.delta[k], dir * track.f[k]))
            .collect();
        path.push((dir * ev.angle, dir * ev.f));
        reserve_beyond_return(&path).max(T::zero())
    } else {
        T::zero()
    };
    let eta = eta_from_areas(a_acc, a_dec + reserve);
    MarginReport {
        subject: track.label.clone(),
        a_acc,
        a_dec,
        a_dec_reserve: reserve,
        residual_ke: a_acc - a_dec,
        eta,
        verdict: classify(eta, ev.kind),
        terminating: Some(ev),
    }
}

/// Equal-area margin of `series.tracks[subject]`, accounting from the clearing
/// sample to the first terminating event.
pub fn machine_margin<T: Real>(series: &FrameSeries<T>, subject: usize) -> MarginReport<T> {
    track_margin(&series.times, series.clear_index, &series.tracks[subject])
}

/// Indices of the machines whose kinetic energy at clearing (in `series`)
/// exceeds [`MONITOR_FRACTION`] of the largest one.
pub fn monitored_machines<T: Real>(series: &FrameSeries<T>) -> Vec<usize> {
    let c = series.clear_index;
    let ke: Vec<T> = series
        .tracks
        .iter()
        .map(|t| lit::<T>(0.5) * t.inertia * t.omega[c] * t.omega[c])
        .collect();
    let max = ke.iter().copied().fold(T::zero(), T::max);
    if max == T::zero() {
        return (0..ke.len()).collect();
    }
    let floor = lit::<T>(MONITOR_FRACTION) * max;
    (0..ke.len()).filter(|&i| ke[i] > floor).collect()
}

/// Original-system assessment under the unity principle.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemVerdict<T> {
    pub verdict: Verdict,
    /// `[min, max]` margin over the unstable machines when unstable,
    /// otherwise the smallest determinate margin twice.
    pub severity: [T; 2],
}

pub fn unity_verdict<T: Real>(reports: &[MarginReport<T>]) -> Result<SystemVerdict<T>> {
    if reports.is_empty() {
        return Err(Error::Empty("no machine margins to combine".into()));
    }
    let range = |it: &mut dyn Iterator<Item = T>| {
        it.fold([T::infinity(), T::neg_infinity()], |[lo, hi], e| [lo.min(e), hi.max(e)])
    };
    let unstable: Vec<T> = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Unstable)
        .map(|r| r.eta)
        .collect();
    if !unstable.is_empty() {
        return Ok(SystemVerdict {
            verdict: Verdict::Unstable,
            severity: range(&mut unstable.into_iter()),
        });
    }
    let determinate: Vec<&MarginReport<T>> =
        reports.iter().filter(|r| r.verdict.is_determinate()).collect();
    let min = determinate.iter().map(|r| r.eta).fold(T::infinity(), T::min);
    let verdict = if determinate.iter().any(|r| r.verdict == Verdict::Critical) {
        Verdict::Critical
    } else if determinate.len() < reports.len() {
        Verdict::UndeterminedHorizon
    } else {
        Verdict::Stable
    };
    Ok(SystemVerdict {
        verdict,
        severity: [min, min],
    })
}
