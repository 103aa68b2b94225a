//! `phaselab`: one-off solves, phase-plane sweeps, logistic fits, theory
//! curves and SVG plots.
//!
//! Exit status: 0 success, 1 usage or input error, 2 recovery failure,
//! 3 solver failure (`solve` only).

mod config;
mod plot;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phaselab::experiment::glm::{read_transitions, write_transitions, TransitionRow};
use phaselab::experiment::records::read_trials_file;
use phaselab::experiment::{
    assess, fit_all, run_grid, CsvSink, FailureMode, Preset, PresetScale, RecordSink, RunOptions, TrialStatus,
    TrialsHeader,
};
use phaselab::theory::write_curves_csv;
use phaselab::{
    make_instance, solve, solve_indirect, CurveKind, EnsembleKind, EnsembleSpec, Error, Result, SignalModel,
    SolverConfig, TransitionCurve, Variant,
};

use config::{seed_from_env, RunConfig};

const USAGE_ERROR: u8 = 1;
const TRANSITIONS_MAGIC: &str = "# phaselab-transitions ";

#[derive(Parser)]
#[command(name = "phaselab", version, about = "Complex basis pursuit and empirical phase transitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one instance, solve it and classify the outcome.
    Solve(SolveArgs),
    /// Run a phase-plane sweep from a JSON config or a preset.
    Run(RunArgs),
    /// Fit logistic transitions to trials CSVs.
    Fit(FitArgs),
    /// Export theoretical transition curves as CSV.
    Curve(CurveArgs),
    /// Render transitions and theory curves as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Exact,
    Relaxed,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Exact => Variant::Exact,
            VariantArg::Relaxed => Variant::Relaxed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// fourier, gaussian, bernoulli, ternary or real-gaussian.
    #[arg(long, default_value = "fourier")]
    ensemble: EnsembleKind,
    /// circular-gaussian, unit-modulus or equal-real-imag.
    #[arg(long, default_value = "circular-gaussian")]
    signal: SignalModel,
    /// Signal length.
    #[arg(long = "N")]
    signal_len: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    rho: f64,
    /// Instance seed (default: PHASELAB_SEED, else 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "exact")]
    variant: VariantArg,
    /// Minimize the real ℓ1 norm of the stacked real system instead.
    #[arg(long)]
    indirect: bool,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config (omit when using --preset).
    config: Option<PathBuf>,
    /// fig1, fig2, fig3, mmv or mmv-worst.
    #[arg(long, conflicts_with = "config")]
    preset: Option<Preset>,
    /// Preset override: signal length for every run.
    #[arg(long = "N", requires = "preset")]
    signal_len: Option<usize>,
    /// Preset override: comma-separated deltas (default: 0.02, 0.05, …, 0.98).
    #[arg(long, value_delimiter = ',', requires = "preset")]
    deltas: Option<Vec<f64>>,
    /// Preset override: trials per cell.
    #[arg(long, default_value_t = 20, requires = "preset")]
    trials: usize,
    /// Preset override: base seed (PHASELAB_SEED takes precedence).
    #[arg(long, default_value_t = 1, requires = "preset")]
    seed: u64,
    /// Preset output directory.
    #[arg(long, default_value = "runs", requires = "preset")]
    out: PathBuf,
    /// Preset: write runtime_ms as 0 for byte-reproducible output.
    #[arg(long, requires = "preset")]
    no_timing: bool,
    /// Print the effective config as JSON and exit.
    #[arg(long)]
    dry_run: bool,
    /// Skip trials already present in the output files.
    #[arg(long)]
    resume: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct FitArgs {
    /// Trials CSVs written by `run`.
    #[arg(required = true)]
    trials: Vec<PathBuf>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop solver failures and indeterminate runs instead of counting them as failures.
    #[arg(long)]
    exclude_solver_failures: bool,
}

#[derive(Args)]
struct CurveArgs {
    /// Curves to export (default: both).
    #[arg(long, value_delimiter = ',')]
    kind: Vec<CurveKind>,
    /// δ spacing of the samples.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Transitions CSVs written by `fit`.
    #[arg(long, num_args = 1..)]
    transitions: Vec<PathBuf>,
    /// Curve CSVs written by `curve`.
    #[arg(long, num_args = 1..)]
    curves: Vec<PathBuf>,
    /// Theory curves to compute and overlay directly.
    #[arg(long, value_delimiter = ',')]
    theory: Vec<CurveKind>,
    #[arg(long, default_value = "phase.svg")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Run(args) => cmd_run(args).map(|()| ExitCode::SUCCESS),
        Command::Fit(args) => cmd_fit(args),
        Command::Curve(args) => cmd_curve(args).map(|()| ExitCode::SUCCESS),
        Command::Plot(args) => cmd_plot(args).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(USAGE_ERROR)
    })
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let seed = match args.seed {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(0),
    };
    let spec = EnsembleSpec::new(args.ensemble).with_signal(args.signal);
    let instance = make_instance(spec, args.signal_len, args.delta, args.rho, seed)?;
    let cfg = SolverConfig::for_variant(args.variant.into());
    let result = if args.indirect { solve_indirect(&instance, &cfg)? } else { solve(&instance, &cfg)? };
    let a = assess(&result, &instance.x_true)?;
    println!("n: {}  k: {}  seed: {seed}", instance.measurements, instance.sparsity);
    println!("status: {}", a.status);
    println!("rrmse: {:.3e}", a.rrmse);
    println!("l1_ratio: {:.9}", a.l1_ratio);
    println!("outer_iters: {}", result.outer_iters);
    println!("inner_iters: {}", result.total_inner_iters);
    println!("feasibility: {:.3e}", result.feasibility_residual);
    println!("converged: {}", result.converged);
    Ok(ExitCode::from(match a.status {
        TrialStatus::Success => 0,
        TrialStatus::RecoveryFailure => 2,
        TrialStatus::SolverFailure | TrialStatus::Indeterminate => 3,
    }))
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(preset)) => {
            let scale = PresetScale {
                signal_len: args.signal_len,
                deltas: args.deltas.clone(),
                trials: args.trials,
                base_seed: args.seed,
            };
            RunConfig { output_dir: args.out.clone(), record_timing: !args.no_timing, runs: preset.plans(&scale)? }
        }
        (None, None) => return Err(Error::InvalidInput("give a config path or --preset".into())),
    };
    cfg.apply_seed_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = run_config(&args)?;
    if args.dry_run {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    for plan in &cfg.runs {
        let path = cfg.trials_path(plan);
        let header = TrialsHeader::new(plan.mode, plan.solver.clone());
        let sink = if args.resume { CsvSink::resume(&path, header)? } else { CsvSink::create(&path, header)? };
        let mut sink = if cfg.record_timing { sink } else { sink.without_timing() };
        let opts = RunOptions { workers: args.workers, progress_every: (plan.grid.trial_count() / 20).max(1) };
        let summary = run_grid(&plan.grid, &plan.spec(), &mut sink, &opts)?;
        println!("{} N={}: {summary} -> {}", plan.label, plan.grid.signal_len, path.display());
        debug_assert_eq!(sink.records().len(), summary.total());
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode> {
    let mode = if args.exclude_solver_failures { FailureMode::Exclude } else { FailureMode::CountAsFailure };
    let mut records = Vec::new();
    let mut variants = BTreeMap::new();
    for path in &args.trials {
        let (header, recs) = read_trials_file(path).map_err(|e| with_path(path, e))?;
        for r in &recs {
            variants.insert(r.ensemble.clone(), header.solver.variant);
        }
        records.extend(recs);
    }
    let rows = fit_all(&records, mode);
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let meta = serde_json::json!({ "variants": variants });
    writeln!(out, "{TRANSITIONS_MAGIC}{meta}")?;
    write_transitions(&mut out, &rows)?;
    let fitted = rows.iter().filter(|r| r.rho50.is_some()).count();
    for r in rows.iter().filter(|r| r.rho50.is_none()) {
        log::warn!("{} N={} delta={}: {}", r.ensemble, r.signal_len, r.delta, r.reason);
    }
    Ok(if fitted > 0 { ExitCode::SUCCESS } else { ExitCode::from(USAGE_ERROR) })
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Malformed { row, reason } => Error::Malformed { row, reason: format!("{}: {reason}", path.display()) },
        other => Error::InvalidInput(format!("{}: {other}", path.display())),
    }
}

fn curve_deltas(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidInput(format!("step must lie in (0, 0.5), got {step}")));
    }
    let count = (1.0 / step - 1e-9).floor() as usize;
    Ok((1..=count).map(|i| i as f64 * step).filter(|&d| d < 1.0).collect())
}

fn cmd_curve(args: CurveArgs) -> Result<()> {
    let kinds = if args.kind.is_empty() { CurveKind::ALL.to_vec() } else { args.kind };
    let deltas = curve_deltas(args.step)?;
    let curves = kinds.into_iter().map(|k| TransitionCurve::sample(k, &deltas)).collect::<Result<Vec<_>>>()?;
    match args.out {
        Some(p) => write_curves_csv(File::create(p)?, &curves),
        None => write_curves_csv(std::io::stdout().lock(), &curves),
    }
}

#[derive(serde::Deserialize)]
struct CurveRow {
    delta: f64,
    rho: f64,
    kind: CurveKind,
}

fn read_curves(path: &Path) -> Result<Vec<TransitionCurve>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| with_path(path, e.into()))?;
    let mut by_kind: BTreeMap<&'static str, TransitionCurve> = BTreeMap::new();
    for row in reader.deserialize::<CurveRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            with_path(path, Error::Malformed { row: line, reason: e.to_string() })
        })?;
        by_kind
            .entry(row.kind.name())
            .or_insert_with(|| TransitionCurve { kind: row.kind, samples: Vec::new() })
            .samples
            .push((row.delta, row.rho));
    }
    Ok(by_kind.into_values().collect())
}

fn read_transitions_file(path: &Path) -> Result<(BTreeMap<String, Variant>, Vec<TransitionRow>)> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let variants = match first.strip_prefix(TRANSITIONS_MAGIC) {
        Some(json) => {
            let meta: serde_json::Value = serde_json::from_str(json.trim())
                .map_err(|e| Error::Malformed { row: 1, reason: format!("{}: {e}", path.display()) })?;
            serde_json::from_value(meta["variants"].clone()).unwrap_or_default()
        }
        None => BTreeMap::new(),
    };
    let rows = read_transitions(File::open(path)?).map_err(|e| with_path(path, e))?;
    Ok((variants, rows))
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let mut series = Vec::new();
    for path in &args.transitions {
        let (variants, rows) = read_transitions_file(path)?;
        let mut groups: BTreeMap<(String, usize), Vec<(f64, f64)>> = BTreeMap::new();
        for r in rows {
            let points = groups.entry((r.ensemble, r.signal_len)).or_default();
            if let Some(rho50) = r.rho50 {
                points.push((r.delta, rho50));
            }
        }
        for ((ensemble, len), mut points) in groups {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let variant = variants.get(&ensemble).map_or(String::new(), |v| format!(" ({})", variant_name(*v)));
            series.push(plot::Series { label: format!("{ensemble} N={len}{variant}"), points, theory: false });
        }
    }
    let mut curves = Vec::new();
    for path in &args.curves {
        curves.extend(read_curves(path)?);
    }
    for kind in &args.theory {
        curves.push(TransitionCurve::cached(*kind).clone());
    }
    for c in curves {
        series.push(plot::Series { label: format!("theory {}", c.kind), points: c.samples, theory: true });
    }
    if series.is_empty() {
        return Err(Error::InvalidInput("nothing to plot: give --transitions, --curves or --theory".into()));
    }
    std::fs::write(&args.out, plot::render(&series))?;
    println!("wrote {} ({} series)", args.out.display(), series.len());
    Ok(())
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Exact => "exact",
        Variant::Relaxed => "relaxed",
    }
}
