//! Report files. Every CSV carries a header row with units; angles appear in
//! rad (authoritative) and deg.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use csv::Writer;

use eqm_core::eqmach::{energy, GroupPattern};
use eqm_core::frames::MIRROR_LABELS;
use eqm_core::indmach::SystemVerdict;
use eqm_core::innergroup::FiercenessReport;
use eqm_core::{
    CctReport, EquivalentSeries, FrameSeries, InnerMotionSeries, MarginReport, PatternResult, Scenario, SwingEvent, Track,
    Trajectory,
};

/// Shortest round-trip form, scientific outside a readable range.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e6).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn angle(x: f64) -> [String; 2] {
    [num(x), num(x.to_degrees())]
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn equivalent_name(p: &GroupPattern) -> String {
    let ids: Vec<String> = p.critical().iter().map(|id| id.to_string()).collect();
    format!("equivalent_{}.csv", ids.join("-"))
}

pub fn trajectory(path: &Path, traj: &Trajectory, series: &FrameSeries) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "t_s",
        "stage",
        "frame",
        "machine",
        "delta_rad",
        "delta_deg",
        "omega_rad_per_s",
        "f_pu",
    ])?;
    let frame = series.tag.to_string();
    for (k, &t) in series.times.iter().enumerate() {
        let stage = traj.stage_at(k).to_string();
        for (i, tr) in series.tracks.iter().enumerate() {
            let [rad, deg] = angle(tr.delta[k]);
            w.write_record([
                num(t),
                stage.clone(),
                frame.clone(),
                traj.ids[i].to_string(),
                rad,
                deg,
                num(tr.omega[k]),
                num(tr.f[k]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn equivalent(path: &Path, eq: &EquivalentSeries) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    let mut header = vec!["t_s".to_string()];
    for s in ["cr_ncr", "cr_sys", "ncr_sys"] {
        for col in ["delta_rad", "delta_deg", "omega_rad_per_s", "f_pu"] {
            header.push(format!("{s}_{col}"));
        }
    }
    header.extend(["v_ke_pu", "v_pe_pu", "v_total_pu"].map(String::from));
    w.write_record(&header)?;

    let en = energy(eq);
    let c = eq.clear_index;
    for (k, &t) in eq.times.iter().enumerate() {
        let mut row = vec![num(t)];
        for tr in [&eq.cr_ncr, &eq.cr_sys, &eq.ncr_sys] {
            row.extend(angle(tr.delta[k]));
            row.push(num(tr.omega[k]));
            row.push(num(tr.f[k]));
        }
        // Energies are defined from clearing on.
        for v in [&en.v_ke, &en.v_pe, &en.v_total] {
            row.push(if k >= c { num(v[k - c]) } else { String::new() });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn kimbark_rows(
    w: &mut Writer<std::fs::File>,
    lead: &[String],
    times: &[f64],
    clear: usize,
    tr: &Track,
) -> Result<()> {
    for k in clear..times.len() {
        let mut row = lead.to_vec();
        row.push(num(times[k]));
        row.extend(angle(tr.delta[k]));
        row.push(num(tr.f[k]));
        w.write_record(&row)?;
    }
    Ok(())
}

/// Post-fault `f` against `delta` for every machine (COI-SYS) and every
/// evaluated CR-NCR system.
pub fn kimbark(path: &Path, sys: &FrameSeries, series: &[EquivalentSeries]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["frame", "subject", "t_s", "delta_rad", "delta_deg", "f_pu"])?;
    for tr in &sys.tracks {
        let lead = [sys.tag.to_string(), tr.label.clone()];
        kimbark_rows(&mut w, &lead, &sys.times, sys.clear_index, tr)?;
    }
    for eq in series {
        let lead = ["CR-NCR".to_string(), eq.pattern.to_string()];
        kimbark_rows(&mut w, &lead, &eq.times, eq.clear_index, &eq.cr_ncr)?;
    }
    w.flush()?;
    Ok(())
}

const EVENT_HEADER: [&str; 11] = [
    "level",
    "subject",
    "kind",
    "swing",
    "t_s",
    "delta_rad",
    "delta_deg",
    "omega_rad_per_s",
    "f_pu",
    "coincident",
    "sample",
];

fn event_row(level: &str, subject: &str, kind: &str, e: &SwingEvent) -> Vec<String> {
    let [rad, deg] = angle(e.angle);
    vec![
        level.to_string(),
        subject.to_string(),
        kind.to_string(),
        e.swing_index.to_string(),
        num(e.time),
        rad,
        deg,
        num(e.omega),
        num(e.f),
        e.coincident.to_string(),
        e.sample.to_string(),
    ]
}

/// IDSP/IDLP of each machine in COI-SYS, then EDSP/EDLP of each pattern.
pub fn events(path: &Path, sys: &FrameSeries, results: &[PatternResult]) -> Result<()> {
    use eqm_core::indmach::{detect_dlp, detect_dsp};
    let mut w = Writer::from_path(path)?;
    w.write_record(EVENT_HEADER)?;
    for (i, tr) in sys.tracks.iter().enumerate() {
        let mut ev = detect_dsp(sys, i);
        ev.extend(detect_dlp(sys, i));
        ev.sort_by(|a, b| a.sample.cmp(&b.sample).then(a.time.total_cmp(&b.time)));
        for e in &ev {
            w.write_record(event_row("individual", &tr.label, &format!("I{}", e.kind), e))?;
        }
    }
    for r in results {
        for e in &r.events {
            w.write_record(event_row("equivalent", &r.pattern.to_string(), &format!("E{}", e.kind), e))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn margin_row(level: &str, monitored: &str, m: &MarginReport, subject: &str) -> Vec<String> {
    let (event, t_event) = match &m.terminating {
        Some(e) => (e.kind.to_string(), num(e.time)),
        None => (String::new(), String::new()),
    };
    vec![
        level.to_string(),
        subject.to_string(),
        monitored.to_string(),
        num(m.a_acc),
        num(m.a_dec),
        num(m.a_dec_reserve),
        num(m.residual_ke),
        num(m.eta),
        String::new(),
        m.verdict.to_string(),
        event,
        t_event,
    ]
}

/// Individual margins with the unity-principle interval, then the pattern
/// margins with the dominant `eta_sys`.
pub fn margins(
    path: &Path,
    individual: &[MarginReport],
    monitored: &[usize],
    unity: &SystemVerdict<f64>,
    results: &[PatternResult],
    dominant: &PatternResult,
) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "level",
        "subject",
        "monitored",
        "a_acc_pu",
        "a_dec_pu",
        "a_dec_reserve_pu",
        "residual_ke_pu",
        "eta",
        "eta_max",
        "verdict",
        "terminating_event",
        "t_event_s",
    ])?;
    for (i, m) in individual.iter().enumerate() {
        let mon = monitored.contains(&i).to_string();
        w.write_record(margin_row("individual", &mon, m, &m.subject))?;
    }
    w.write_record([
        "system-unity".to_string(),
        "SYS".to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        num(unity.severity[0]),
        num(unity.severity[1]),
        unity.verdict.to_string(),
        String::new(),
        String::new(),
    ])?;
    for r in results {
        w.write_record(margin_row("equivalent", "", &r.margin, &r.pattern.to_string()))?;
    }
    let mut row = margin_row("system-equivalent", "", &dominant.margin, &dominant.pattern.to_string());
    row[8] = num(dominant.margin.eta);
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

pub fn mirror(path: &Path, series: &[EquivalentSeries]) -> Result<()> {
    use eqm_core::eqmach::{equivalent_margin, mirror_margin};
    let mut w = Writer::from_path(path)?;
    let mut header = vec!["pattern".to_string(), "m_cr_pu".into(), "m_ncr_pu".into(), "m_sys_pu".into()];
    for l in MIRROR_LABELS {
        header.push(format!("abs[{l}]"));
    }
    for l in MIRROR_LABELS {
        header.push(format!("rel[{l}]"));
    }
    header.extend(["eta_cr_ncr", "eta_cr_sys", "eta_abs_diff"].map(String::from));
    w.write_record(&header)?;
    for eq in series {
        let res = eq.mirror_residuals()?;
        let (a, b) = (equivalent_margin(eq).eta, mirror_margin(eq).eta);
        let diff = if a == b { 0.0 } else { (a - b).abs() };
        let mut row = vec![eq.pattern.to_string(), num(eq.m_cr), num(eq.m_ncr), num(eq.m_sys)];
        row.extend(res.absolute.iter().map(|&x| num(x)));
        row.extend(res.relative().iter().map(|&x| num(x)));
        row.extend([num(a), num(b), num(diff)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Member motion about its group's centre for one pattern.
pub fn inner_group(
    path: &Path,
    pattern: &GroupPattern,
    inner: &InnerMotionSeries,
    fierce: &FiercenessReport<f64>,
) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "pattern",
        "machine",
        "group",
        "group_fierceness",
        "t_s",
        "inner_delta_rad",
        "inner_delta_deg",
    ])?;
    let p = pattern.to_string();
    for m in &inner.members {
        let level = match m.group {
            eqm_core::innergroup::Group::Critical => fierce.critical,
            eqm_core::innergroup::Group::NonCritical => fierce.non_critical,
        };
        for (k, &t) in inner.times.iter().enumerate() {
            let [rad, deg] = angle(m.delta[k]);
            w.write_record([
                p.clone(),
                m.id.to_string(),
                m.group.to_string(),
                level.to_string(),
                num(t),
                rad,
                deg,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn patterns(path: &Path, results: &[PatternResult], dominant: &PatternResult) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "pattern",
        "dominant",
        "a_acc_pu",
        "a_dec_pu",
        "a_dec_reserve_pu",
        "eta",
        "verdict",
        "terminating_event",
        "t_event_s",
        "max_excursion_rad",
        "cr_kinetic_at_clearing_pu",
    ])?;
    for r in results {
        let m = &r.margin;
        w.write_record([
            r.pattern.to_string(),
            (r.pattern == dominant.pattern).to_string(),
            num(m.a_acc),
            num(m.a_dec),
            num(m.a_dec_reserve),
            num(m.eta),
            m.verdict.to_string(),
            m.terminating.as_ref().map(|e| e.kind.to_string()).unwrap_or_default(),
            opt_num(m.terminating.as_ref().map(|e| e.time)),
            num(r.max_excursion),
            num(r.sys_kinetic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn summary(
    scenario_path: &Path,
    scenario: &Scenario,
    individual: &[MarginReport],
    monitored: &[usize],
    unity: &SystemVerdict<f64>,
    results: &[PatternResult],
    dominant: &PatternResult,
    fierce: &FiercenessReport<f64>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", scenario_path.display());
    let _ = writeln!(
        s,
        "machines: {}  t_clear: {} s  t_end: {} s  dt: {} s",
        scenario.n_machines(),
        num(scenario.t_clear),
        num(scenario.t_end),
        num(scenario.dt)
    );
    let names: Vec<&str> = monitored.iter().map(|&i| individual[i].subject.as_str()).collect();
    let _ = writeln!(s, "monitored machines: {}", names.join(", "));
    let _ = writeln!(
        s,
        "individual (unity principle): {}  eta in [{}, {}]",
        unity.verdict,
        num(unity.severity[0]),
        num(unity.severity[1])
    );
    let _ = writeln!(s, "patterns evaluated: {}", results.len());
    let _ = writeln!(
        s,
        "equivalent (dominant {}): {}  eta_sys = {}",
        dominant.pattern,
        dominant.margin.verdict,
        num(dominant.margin.eta)
    );
    let _ = writeln!(
        s,
        "inner-group motion (threshold {} rad): CR {}, NCR {}, severity trusted: {}",
        num(fierce.threshold),
        fierce.critical,
        fierce.non_critical,
        fierce.severity_trust
    );
    if let Some((id, x)) = fierce.worst {
        let _ = writeln!(s, "largest inner excursion: machine {id}, {} rad", num(x));
    }
    s
}

pub fn cct_probes(path: &Path, rep: &CctReport) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["probe", "t_clear_s", "verdict", "eta", "stable_side", "dominant_pattern"])?;
    for (k, p) in rep.probes.iter().enumerate() {
        w.write_record([
            k.to_string(),
            num(p.t_clear),
            p.verdict.to_string(),
            num(p.eta),
            p.is_stable_side().to_string(),
            p.pattern.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cct_kimbark(path: &Path, cases: &[(&str, f64, EquivalentSeries)]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["case", "t_clear_s", "pattern", "t_s", "delta_rad", "delta_deg", "f_pu"])?;
    for (label, t, eq) in cases {
        let lead = [label.to_string(), num(*t), eq.pattern.to_string()];
        kimbark_rows(&mut w, &lead, &eq.times, eq.clear_index, &eq.cr_ncr)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cct_summary(scenario_path: &Path, rep: &CctReport, tol: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", scenario_path.display());
    let _ = writeln!(s, "cct_s: {}", num(rep.cct));
    let _ = writeln!(s, "t_lo_s: {}", num(rep.t_lo));
    let _ = writeln!(s, "t_hi_s: {}", num(rep.t_hi));
    let _ = writeln!(s, "bracket_width_s: {}", num(rep.t_hi - rep.t_lo));
    let _ = writeln!(s, "tol_s: {}", num(tol));
    let _ = writeln!(s, "probes: {}", rep.probes.len());
    s
}
