//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 fit non-convergence
//! (`--strict` only), 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{dt_grid, FitTarget, RunConfig, RunRecord};
use crate::error::{Error, Result};
use crate::experiment::{compare_modes, run_mode, Experiment, ModeRun};
use crate::fitting::{fit_window, FitModel, FitRecord, FitResult, WindowFits};
use crate::output::{self, write_atomic};
use crate::render::render_svg;

#[derive(Debug, Parser)]
#[command(
    name = "synlab",
    version,
    about = "Multi-level STDP with dendritic compound synapses of bistable stochastic devices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo STDP window with analytic reference and fits.
    StdpWindow(RunArgs),
    /// Dendritic run against the flat (all attenuations 1) baseline.
    Compare(RunArgs),
    /// Switching probability versus applied peak voltage.
    DeviceCurve(DeviceCurveArgs),
    /// Per-device peaks and switching probabilities over the Δt grid.
    Curves(GridArgs),
    /// Analytic conductance-change distribution over the Δt grid.
    States(GridArgs),
    /// Samples the spike waveform.
    Waveform(WaveformArgs),
    /// Re-fits a summary.csv.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration (a previous run.json is accepted too).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, env = "SYNLAB_THREADS", default_value_t = 0)]
    threads: usize,
    /// Adds timing jitter and level noise to the recorded samples.
    #[arg(long)]
    figure_mode: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Write window.svg even outside figure mode.
    #[arg(long)]
    svg: bool,
    /// Exit with code 2 when a fit fails to converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct DeviceCurveArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    vmin: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    vmax: f64,
    #[arg(long, default_value_t = 401)]
    steps: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    dt_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt_max: Option<f64>,
    #[arg(long)]
    dt_step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WaveformArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, allow_negative_numbers = true)]
    t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    /// Configuration supplying the fit domains.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum TargetArg {
    Mode,
    Mean,
}

impl From<TargetArg> for FitTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Mode => FitTarget::Mode,
            TargetArg::Mean => FitTarget::Mean,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

impl RunArgs {
    fn effective_config(&self) -> Result<RunConfig> {
        let mut config = load_config(self.config.as_deref())?;
        if let Some(e) = self.epochs {
            config.protocol.epochs = e;
        }
        if let Some(s) = self.seed {
            config.protocol.seed = s;
        }
        if self.figure_mode {
            config.protocol.figure_mode = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn check_convergence(strict: bool, fits: &WindowFits, label: &str) -> Result<()> {
    let bad = fits.unconverged();
    if strict && !bad.is_empty() {
        let names: Vec<String> = bad
            .iter()
            .map(|f| format!("{:?}/{:?}", f.model, f.side))
            .collect();
        return Err(Error::FitNotConverged(format!(
            "{label}: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

/// Writes every data product of one run into `dir`.
fn write_run(
    dir: &Path,
    run: &ModeRun,
    threads: usize,
    svg: bool,
    overlay: &[FitModel],
) -> Result<()> {
    let experiment = Experiment::from_config(&run.config)?;
    let grid = run.config.protocol.dt_grid()?;
    let alphas: Vec<f64> = experiment
        .synapse()
        .branches()
        .iter()
        .map(|b| b.alpha)
        .collect();

    write_atomic(
        &dir.join("samples.csv"),
        output::samples_csv(&run.window).as_bytes(),
    )?;
    write_atomic(
        &dir.join("summary.csv"),
        output::summary_csv(&run.window).as_bytes(),
    )?;
    let states = experiment.state_probability_curves(&grid);
    write_atomic(
        &dir.join("states.csv"),
        output::states_csv(&states).as_bytes(),
    )?;
    let curves = experiment.per_device_probability_curves(&grid);
    write_atomic(
        &dir.join("curves.csv"),
        output::curves_csv(&curves, &alphas).as_bytes(),
    )?;
    write_atomic(
        &dir.join("fits.json"),
        output::fits_json(&run.fits.records()).as_bytes(),
    )?;
    let record = RunRecord {
        config: run.config.clone(),
        seed: run.config.protocol.seed,
        threads,
        wall_time_s: run.window.wall_time_s,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_atomic(&dir.join("run.json"), output::to_json(&record).as_bytes())?;
    if svg {
        let fits: Vec<&FitResult> = run
            .fits
            .all()
            .into_iter()
            .filter(|f| overlay.contains(&f.model))
            .collect();
        write_atomic(
            &dir.join("window.svg"),
            render_svg(&run.window, &fits).as_bytes(),
        )?;
    }
    Ok(())
}

fn stdp_window(args: &RunArgs) -> Result<()> {
    let config = args.effective_config()?;
    let run = run_mode(&config, args.threads)?;
    let svg = args.svg || config.protocol.figure_mode;
    write_run(
        &args.out_dir,
        &run,
        args.threads,
        svg,
        &[FitModel::Exponential, FitModel::Linear],
    )?;
    check_convergence(args.strict, &run.fits, "stdp-window")
}

#[derive(Serialize)]
struct ModeSummary {
    alpha_min: f64,
    alpha_max: f64,
    fits: Vec<FitRecord>,
    r_squared: RSquaredTable,
}

#[derive(Serialize)]
struct RSquaredTable {
    set_exponential: f64,
    set_linear: f64,
    reset_exponential: f64,
    reset_linear: f64,
}

impl ModeSummary {
    fn new(run: &ModeRun) -> Self {
        let alphas: Vec<f64> = run
            .config
            .synapse
            .branches()
            .map(|b| b.iter().map(|x| x.alpha).collect())
            .unwrap_or_default();
        let f = &run.fits;
        Self {
            alpha_min: alphas.iter().cloned().fold(f64::INFINITY, f64::min),
            alpha_max: alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            fits: f.records(),
            r_squared: RSquaredTable {
                set_exponential: f.set_exponential.r_squared,
                set_linear: f.set_linear.r_squared,
                reset_exponential: f.reset_exponential.r_squared,
                reset_linear: f.reset_linear.r_squared,
            },
        }
    }
}

#[derive(Serialize)]
struct ComparisonDoc {
    seed: u64,
    epochs: usize,
    target: FitTarget,
    dendritic: ModeSummary,
    flat: ModeSummary,
}

fn compare(args: &RunArgs) -> Result<()> {
    let config = args.effective_config()?;
    let cmp = compare_modes(&config, args.threads)?;
    let svg = args.svg || config.protocol.figure_mode;
    write_run(
        &args.out_dir.join("dendritic"),
        &cmp.dendritic,
        args.threads,
        svg,
        &[FitModel::Exponential],
    )?;
    write_run(
        &args.out_dir.join("flat"),
        &cmp.flat,
        args.threads,
        svg,
        &[FitModel::Linear],
    )?;
    let doc = ComparisonDoc {
        seed: config.protocol.seed,
        epochs: config.protocol.epochs,
        target: config.fit.target,
        dendritic: ModeSummary::new(&cmp.dendritic),
        flat: ModeSummary::new(&cmp.flat),
    };
    write_atomic(
        &args.out_dir.join("comparison.json"),
        output::to_json(&doc).as_bytes(),
    )?;
    check_convergence(args.strict, &cmp.dendritic.fits, "dendritic")?;
    check_convergence(args.strict, &cmp.flat.fits, "flat")
}

fn device_curve(args: &DeviceCurveArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let points = config.device.curve(args.vmin, args.vmax, args.steps)?;
    emit(
        args.out.as_deref(),
        stdout,
        &output::device_curve_csv(&points),
    )
}

fn grid_for(args: &GridArgs, config: &RunConfig) -> Result<Vec<f64>> {
    let p = &config.protocol;
    dt_grid(
        args.dt_min.unwrap_or(p.dt_min),
        args.dt_max.unwrap_or(p.dt_max),
        args.dt_step.unwrap_or(p.dt_step),
    )
}

fn curves(args: &GridArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let experiment = Experiment::from_config(&config)?;
    let grid = grid_for(args, &config)?;
    let alphas: Vec<f64> = experiment
        .synapse()
        .branches()
        .iter()
        .map(|b| b.alpha)
        .collect();
    let curves = experiment.per_device_probability_curves(&grid);
    emit(
        args.out.as_deref(),
        stdout,
        &output::curves_csv(&curves, &alphas),
    )
}

fn states(args: &GridArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let experiment = Experiment::from_config(&config)?;
    let grid = grid_for(args, &config)?;
    let states = experiment.state_probability_curves(&grid);
    emit(args.out.as_deref(), stdout, &output::states_csv(&states))
}

fn waveform(args: &WaveformArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let w = config.waveform()?;
    let (lo, hi) = w.support().unwrap_or((0.0, 0.0));
    let points = w.sample(
        args.t_min.unwrap_or(lo - 1.0),
        args.t_max.unwrap_or(hi + 1.0),
        args.step,
    )?;
    emit(args.out.as_deref(), stdout, &output::waveform_csv(&points))
}

fn fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let mut fit_config = config.fit;
    if let Some(t) = args.target {
        fit_config.target = t.into();
    }
    let points = output::read_summary(&args.input)?;
    let fits = fit_window(&points, &fit_config);
    emit(
        args.out.as_deref(),
        stdout,
        &output::fits_json(&fits.records()),
    )?;
    check_convergence(args.strict, &fits, "fit")
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::StdpWindow(a) => stdp_window(&a),
        Command::Compare(a) => compare(&a),
        Command::DeviceCurve(a) => device_curve(&a, stdout),
        Command::Curves(a) => curves(&a, stdout),
        Command::States(a) => states(&a, stdout),
        Command::Waveform(a) => waveform(&a, stdout),
        Command::Fit(a) => fit(&a, stdout),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("synlab: {e}");
            e.exit_code()
        }
    }
}
