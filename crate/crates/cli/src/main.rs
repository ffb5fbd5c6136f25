use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use eqm_core::eqmach::{
    aggregate_in, dominant_pattern, enumerate_patterns, evaluate_patterns, find_cct, GroupPattern,
    PatternMode,
};
use eqm_core::frames::{synchronous, to_coi_sys};
use eqm_core::indmach::{machine_margin, monitored_machines, unity_verdict};
use eqm_core::innergroup::{classify_fierceness, inner_motion, DEFAULT_FIERCE_THRESHOLD};
use eqm_core::model::{load_scenario, MachineId};
use eqm_core::sim::simulate;
use eqm_core::{ErrorCategory, Scenario, Trajectory};

mod report;

/// Transient stability analysis with individual and equivalent machines.
#[derive(Debug, Parser)]
#[command(name = "eqm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full analysis: trajectories, events, margins, mirror and inner-group reports.
    Analyze(AnalyzeArgs),
    /// Critical clearing time by bisection on the equivalent-machine verdict.
    Cct(CctArgs),
    /// Candidate group patterns and their margins.
    Patterns(CommonArgs),
    /// Mirror-identity residuals of every candidate pattern.
    Mirror(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    AngleCuts,
    Exhaustive,
}

impl From<Mode> for PatternMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::AngleCuts => PatternMode::AngleCuts,
            Mode::Exhaustive => PatternMode::Exhaustive,
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,

    /// Critical machine ids, comma separated; skips pattern enumeration.
    #[arg(long, value_delimiter = ',')]
    pattern: Option<Vec<MachineId>>,

    #[arg(long, value_enum, default_value = "angle-cuts")]
    mode: Mode,

    /// Output directory.
    #[arg(long, default_value = "eqm-out")]
    out: PathBuf,

    /// Worker threads for the pattern sweep.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Inner-group fierceness threshold, rad.
    #[arg(long, default_value_t = DEFAULT_FIERCE_THRESHOLD)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct CctArgs {
    #[arg(long)]
    scenario: PathBuf,

    /// Clearing time known to be stable, s.
    #[arg(long)]
    t_lo: f64,

    /// Clearing time known to be unstable, s.
    #[arg(long)]
    t_hi: f64,

    /// Final bracket width, s.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,

    #[arg(long, value_enum, default_value = "angle-cuts")]
    mode: Mode,

    #[arg(long, default_value = "eqm-out")]
    out: PathBuf,

    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<eqm_core::Error>().map(|e| e.category()) {
        Some(ErrorCategory::Parse) => 2,
        Some(ErrorCategory::Validation) => 3,
        Some(ErrorCategory::Numeric) => 4,
        Some(ErrorCategory::Bracket) => 5,
        None => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(args) => analyze(&args),
        Command::Cct(args) => cct(&args),
        Command::Patterns(args) => patterns(&args),
        Command::Mirror(args) => mirror(&args),
    }
}

fn load(path: &Path) -> Result<Scenario> {
    Ok(load_scenario(path)?)
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn candidates(traj: &Trajectory, args: &CommonArgs) -> Result<Vec<GroupPattern>> {
    Ok(match &args.pattern {
        Some(ids) => vec![GroupPattern::from_critical(ids, &traj.ids)?],
        None => enumerate_patterns(traj, args.mode.into())?,
    })
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let c = &args.common;
    let scenario = load(&c.scenario)?;
    let traj = simulate(&scenario)?;
    let syn = synchronous(&traj);
    let sys = to_coi_sys(&traj);

    let individual: Vec<_> = (0..sys.tracks.len()).map(|i| machine_margin(&sys, i)).collect();
    let monitored = monitored_machines(&sys);
    let picked: Vec<_> = monitored.iter().map(|&i| individual[i].clone()).collect();
    let unity = unity_verdict(&picked)?;

    let patterns = candidates(&traj, c)?;
    let results = evaluate_patterns(&traj, &patterns, c.parallel)?;
    let dominant = dominant_pattern(&results)?;
    let series = patterns
        .iter()
        .map(|p| aggregate_in(&traj, &sys, p))
        .collect::<eqm_core::Result<Vec<_>>>()?;
    let dom_eq = &series[results.iter().position(|r| r.pattern == dominant.pattern).unwrap_or(0)];
    let inner = inner_motion(&traj, dom_eq)?;
    let fierce = classify_fierceness(&inner, args.threshold);

    let out = &c.out;
    prepare_out(out)?;
    report::trajectory(&out.join("trajectory_syn.csv"), &traj, &syn)?;
    report::trajectory(&out.join("trajectory_coi_sys.csv"), &traj, &sys)?;
    for eq in &series {
        report::equivalent(&out.join(report::equivalent_name(&eq.pattern)), eq)?;
    }
    report::kimbark(&out.join("kimbark.csv"), &sys, &series)?;
    report::events(&out.join("events.csv"), &sys, &results)?;
    report::margins(
        &out.join("margins.csv"),
        &individual,
        &monitored,
        &unity,
        &results,
        dominant,
    )?;
    report::mirror(&out.join("mirror.csv"), &series)?;
    report::inner_group(&out.join("inner_group.csv"), &dom_eq.pattern, &inner, &fierce)?;

    let summary = report::summary(
        &c.scenario,
        &scenario,
        &individual,
        &monitored,
        &unity,
        &results,
        dominant,
        &fierce,
    );
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn cct(args: &CctArgs) -> Result<()> {
    let scenario = load(&args.scenario)?;
    let mode: PatternMode = args.mode.into();
    let rep = find_cct(&scenario, args.t_lo, args.t_hi, args.tol, mode, args.parallel)?;

    // Kimbark curves of the dominant pattern on both sides of the final bracket.
    let mut cases = Vec::new();
    for (label, t) in [("critical-stable", rep.t_lo), ("critical-unstable", rep.t_hi)] {
        let traj = simulate(&scenario.with_clearing_time(t))?;
        let patterns = enumerate_patterns(&traj, mode)?;
        let results = evaluate_patterns(&traj, &patterns, args.parallel)?;
        let d = dominant_pattern(&results)?;
        let eq = aggregate_in(&traj, &to_coi_sys(&traj), &d.pattern)?;
        cases.push((label, t, eq));
    }

    prepare_out(&args.out)?;
    report::cct_probes(&args.out.join("cct_probes.csv"), &rep)?;
    report::cct_kimbark(&args.out.join("cct_kimbark.csv"), &cases)?;
    let text = report::cct_summary(&args.scenario, &rep, args.tol);
    std::fs::write(args.out.join("cct.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn patterns(args: &CommonArgs) -> Result<()> {
    let traj = simulate(&load(&args.scenario)?)?;
    let patterns = candidates(&traj, args)?;
    let results = evaluate_patterns(&traj, &patterns, args.parallel)?;
    let dominant = dominant_pattern(&results)?;
    prepare_out(&args.out)?;
    let path = args.out.join("patterns.csv");
    report::patterns(&path, &results, dominant)?;
    print!("{}", std::fs::read_to_string(&path)?);
    Ok(())
}

fn mirror(args: &CommonArgs) -> Result<()> {
    let traj = simulate(&load(&args.scenario)?)?;
    let sys = to_coi_sys(&traj);
    let series = candidates(&traj, args)?
        .iter()
        .map(|p| aggregate_in(&traj, &sys, p))
        .collect::<eqm_core::Result<Vec<_>>>()?;
    prepare_out(&args.out)?;
    let path = args.out.join("mirror.csv");
    report::mirror(&path, &series)?;
    print!("{}", std::fs::read_to_string(&path)?);
    Ok(())
}
