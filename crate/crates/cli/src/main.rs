//! `risfloq`: Floquet mode-matching solver for periodic impedance reflectors.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numeric failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use ris_floquet::far_field::normalized_pattern;
use ris_floquet::power::power_budget;
use ris_floquet::profile::table::format_table;
use ris_floquet::verification::{run_invariant_suite_with, SuiteOptions, DEFAULT_COLLOCATION_POINTS};
use ris_floquet::{solve, Error, ScatterScenario};

use config::{format_modes, read_file_config, resolve, ComplexText, FileConfig, Overrides, RunConfig, SweepVariable};
use output::{emit, SweepLine};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => e.category(),
            CliError::Verification { .. } => "VerificationFailed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) if is_input_error(e) => 2,
            CliError::Core(_) => 3,
        }
    }
}

/// Errors caused by the inputs rather than by the numerics.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidArgument(_)
            | Error::InvalidAngle { .. }
            | Error::DegenerateGeometry
            | Error::NoDesignAngle
            | Error::MalformedTable(_)
            | Error::GeometryMismatch { .. }
    )
}

#[derive(Debug, Parser)]
#[command(name = "risfloq", version, about = "Floquet mode-matching solver for periodic impedance reflectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    frequency_ghz: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta_i_deg: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta_r_deg: Option<f64>,
    /// Harmonics -N..=N are retained.
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Aperture side length in periods.
    #[arg(long, global = true)]
    periods_per_side: Option<f64>,
    /// z1, z2, z3, pec, tabulated or modes.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Impedance table for the tabulated profile.
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// Prescribed reflected modes, e.g. "1=1+0i,0=-1".
    #[arg(long, global = true, allow_hyphen_values = true)]
    modes: Option<String>,
    /// Pattern samples over [-90, 90] degrees.
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reflected Floquet amplitudes and power fractions.
    Solve,
    /// Normalized far-field pattern.
    Pattern,
    /// Efficiency over a list of N, theta_r or frequency values.
    Sweep {
        /// N, theta_r_deg or frequency_ghz.
        #[arg(long)]
        variable: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Option<Vec<f64>>,
    },
    /// Impedance table that reflects exactly the prescribed modes.
    Design {
        #[arg(long)]
        table_points: Option<usize>,
    },
    /// Invariant and oracle checks; exit 1 if any gating check fails.
    Verify {
        /// Multiplies every check tolerance.
        #[arg(long)]
        tolerance_scale: Option<f64>,
        /// Corrupts one Fourier coefficient before the conservation check.
        #[arg(long)]
        inject_fault: bool,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut flags = Overrides {
        frequency_ghz: c.frequency_ghz,
        theta_i_deg: c.theta_i_deg,
        theta_r_deg: c.theta_r_deg,
        truncation: c.truncation,
        periods_per_side: c.periods_per_side,
        grid_size: c.grid_size,
        output: c.output.clone(),
        profile: c.profile.clone(),
        table: c.table.clone(),
        modes: c.modes.clone(),
        ..Default::default()
    };
    match &cli.command {
        Command::Sweep { variable, values } => {
            flags.sweep_variable = variable.clone();
            flags.sweep_values = values.clone();
        }
        Command::Design { table_points } => flags.table_points = *table_points,
        Command::Verify { tolerance_scale, inject_fault } => {
            flags.tolerance_scale = *tolerance_scale;
            flags.inject_fault = *inject_fault;
        }
        Command::Solve | Command::Pattern => {}
    }
    let (file, base) = match &c.config {
        Some(path) => (read_file_config(path)?, path.parent().map(PathBuf::from)),
        None => (FileConfig::default(), None),
    };
    resolve(file, base.as_deref(), flags)
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let scenario = cfg.scenario()?;
    let profile = cfg.build_profile(&scenario)?;
    let solution = solve(&profile, &scenario)?;
    let budget = power_budget(&solution, &scenario);
    report_diagnostics(&scenario, &solution);
    eprintln!(
        "efficiency = {:.6}, total_reflected = {:.6}",
        budget.efficiency, budget.total_reflected
    );
    let text = output::solve_csv(&cfg.header_lines(), &scenario, &solution, &budget);
    emit(cfg.output.as_deref(), &text)
}

fn report_diagnostics(scenario: &ScatterScenario, solution: &ris_floquet::ModalSolution) {
    let d = &solution.diagnostics;
    eprintln!(
        "condition = {:.3e}, residual = {:.3e}, rank = {}{}",
        d.condition_estimate,
        d.residual_norm,
        d.effective_rank,
        if d.regularized { " (regularized)" } else { "" }
    );
    if !d.grazing_warnings.is_empty() {
        eprintln!("warning: grazing orders {:?} carry no power", d.grazing_warnings);
    }
    if d.truncation_warning {
        eprintln!(
            "warning: propagating orders {:?} exceed the truncation N = {}",
            scenario.propagating_indices(),
            scenario.truncation()
        );
    }
}

fn cmd_pattern(cfg: &RunConfig) -> Result<(), CliError> {
    let scenario = cfg.scenario()?;
    let profile = cfg.build_profile(&scenario)?;
    let solution = solve(&profile, &scenario)?;
    report_diagnostics(&scenario, &solution);
    let pattern = normalized_pattern(&solution, &scenario, cfg.grid_size)?;
    eprintln!("peak at {:.3} deg", pattern.peak_angle.to_degrees());
    let text = output::pattern_csv(&cfg.header_lines(), &scenario, &pattern);
    emit(cfg.output.as_deref(), &text)
}

fn sweep_point(cfg: &RunConfig, value: f64) -> Result<(f64, f64, f64), Error> {
    let mut row = cfg.clone();
    match cfg.sweep_variable {
        SweepVariable::Truncation => row.truncation = value as usize,
        SweepVariable::ThetaRDeg => row.theta_r_deg = value,
        SweepVariable::FrequencyGhz => {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!("frequency {value} GHz must be positive")));
            }
            row.frequency_ghz = value;
        }
    }
    let scenario = row.scenario()?;
    let solution = solve(&row.build_profile(&scenario)?, &scenario)?;
    let budget = power_budget(&solution, &scenario);
    Ok((budget.efficiency, budget.total_reflected, solution.diagnostics.residual_norm))
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let rows: Vec<SweepLine> = cfg
        .sweep_values
        .par_iter()
        .map(|&value| SweepLine { value, outcome: sweep_point(cfg, value) })
        .collect();
    let mut header = cfg.header_lines();
    header.push(format!(
        "sweep = {} over [{}]",
        cfg.sweep_variable.as_str(),
        cfg.sweep_values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
    ));
    let text = output::sweep_csv(&header, cfg.sweep_variable.as_str(), &rows);
    emit(cfg.output.as_deref(), &text)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep rows failed", rows.len());
    }
    match rows.into_iter().find_map(|r| r.outcome.err()) {
        Some(first) if failed == cfg.sweep_values.len() => Err(CliError::Core(first)),
        _ => Ok(()),
    }
}

fn cmd_design(cfg: &RunConfig) -> Result<(), CliError> {
    let modes = cfg
        .modes
        .as_ref()
        .ok_or_else(|| CliError::Config("design needs prescribed modes (--modes or profile.modes)".into()))?;
    let scenario = cfg.scenario()?;
    let profile = ris_floquet::profile::synthesize_from_modes(&scenario, modes)?;
    let samples = profile.sample_table(cfg.table_points)?;
    let solution = solve(&profile, &scenario)?;
    let worst = solution
        .iter()
        .map(|(n, b)| (b - modes.get(&n).copied().unwrap_or_default()).norm())
        .fold(0.0, f64::max);

    let echoed = RunConfig { profile: config::ProfileChoice::Modes, ..cfg.clone() };
    let mut comments = echoed.header_lines();
    comments.push(format!("prescribed = {}", format_modes(modes)));
    for (n, b) in solution.iter().filter(|(n, b)| modes.contains_key(n) || b.norm() > 1e-9) {
        comments.push(format!("recovered B_{n} = {}", ComplexText(b)));
    }
    comments.push(format!("round_trip_max_error = {worst:e}"));
    eprintln!("round-trip max |B_n - prescribed| = {worst:.3e}");
    let text = format_table(scenario.period(), &samples, &comments);
    emit(cfg.output.as_deref(), &text)
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let scenario = cfg.scenario()?;
    cfg.build_profile(&scenario)?;
    let options = SuiteOptions {
        tolerance_scale: cfg.tolerance_scale,
        inject_fault: cfg.inject_fault,
        collocation_points: DEFAULT_COLLOCATION_POINTS,
    };
    let report = run_invariant_suite_with(&scenario, &options);
    let mut text = String::new();
    output::comments(&mut text, cfg.header_lines());
    if cfg.inject_fault {
        output::comments(&mut text, ["inject_fault = true"]);
    }
    text.push_str(&report.to_string());
    emit(cfg.output.as_deref(), &text)?;
    for c in report.failures() {
        eprintln!("FAIL {}: value {:e} > tolerance {:e} ({})", c.name, c.value, c.tolerance, c.detail);
    }
    match report.failures().count() {
        0 => Ok(()),
        failed => Err(CliError::Verification { failed }),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Pattern => cmd_pattern(&cfg),
        Command::Sweep { .. } => cmd_sweep(&cfg),
        Command::Design { .. } => cmd_design(&cfg),
        Command::Verify { .. } => cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
