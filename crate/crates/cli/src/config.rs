//! Run configuration: TOML file, flag overrides, validation.
//!
//! ```toml
//! frequency_ghz = 28.0
//! theta_i_deg = 0.0
//! theta_r_deg = 70.0
//! truncation = 30
//! periods_per_side = 5.0
//! grid_size = 1801
//!
//! [profile]
//! kind = "z3"              # z1 | z2 | z3 | pec | tabulated | modes
//! table = "profile.txt"    # kind = "tabulated"
//! modes = "1=1+0i, 0=-1"   # kind = "modes"
//!
//! [sweep]
//! variable = "N"           # N | theta_r_deg | frequency_ghz
//! values = [10, 20, 30, 60]
//!
//! [design]
//! table_points = 256
//!
//! [verify]
//! tolerance_scale = 1.0
//! inject_fault = false
//! ```
//!
//! Relative table paths in a config file resolve against the file's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use ris_floquet::profile::{
    constant, synthesize_from_modes, table::read_profile, z1_cotangent, z2_geometric_optics, z3_global_optimal,
};
use ris_floquet::{ImpedanceProfile, ScatterScenario};
use serde::Deserialize;

use crate::output::Num;
use crate::CliError;

pub const DEFAULT_FREQUENCY_GHZ: f64 = 28.0;
pub const DEFAULT_THETA_I_DEG: f64 = 0.0;
pub const DEFAULT_THETA_R_DEG: f64 = 70.0;
pub const DEFAULT_TRUNCATION: usize = 30;
pub const DEFAULT_PERIODS_PER_SIDE: f64 = 5.0;
pub const DEFAULT_GRID_SIZE: usize = 1801;
pub const DEFAULT_TABLE_POINTS: usize = 256;
pub const MAX_TRUNCATION: usize = 2000;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub frequency_ghz: Option<f64>,
    pub theta_i_deg: Option<f64>,
    pub theta_r_deg: Option<f64>,
    pub truncation: Option<usize>,
    pub periods_per_side: Option<f64>,
    pub grid_size: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub profile: FileProfile,
    #[serde(default)]
    pub sweep: FileSweep,
    #[serde(default)]
    pub design: FileDesign,
    #[serde(default)]
    pub verify: FileVerify,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileProfile {
    pub kind: Option<String>,
    pub table: Option<PathBuf>,
    pub modes: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSweep {
    pub variable: Option<String>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDesign {
    pub table_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileVerify {
    pub tolerance_scale: Option<f64>,
    pub inject_fault: Option<bool>,
}

/// Values given on the command line; each one wins over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub frequency_ghz: Option<f64>,
    pub theta_i_deg: Option<f64>,
    pub theta_r_deg: Option<f64>,
    pub truncation: Option<usize>,
    pub periods_per_side: Option<f64>,
    pub grid_size: Option<usize>,
    pub output: Option<PathBuf>,
    pub profile: Option<String>,
    pub table: Option<PathBuf>,
    pub modes: Option<String>,
    pub sweep_variable: Option<String>,
    pub sweep_values: Option<Vec<f64>>,
    pub table_points: Option<usize>,
    pub tolerance_scale: Option<f64>,
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileChoice {
    Z1,
    Z2,
    Z3,
    Pec,
    Tabulated,
    Modes,
}

impl ProfileChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileChoice::Z1 => "z1",
            ProfileChoice::Z2 => "z2",
            ProfileChoice::Z3 => "z3",
            ProfileChoice::Pec => "pec",
            ProfileChoice::Tabulated => "tabulated",
            ProfileChoice::Modes => "modes",
        }
    }
}

impl FromStr for ProfileChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "z1" | "cotangent" => ProfileChoice::Z1,
            "z2" | "geometric-optics" => ProfileChoice::Z2,
            "z3" | "global-optimal" => ProfileChoice::Z3,
            "pec" => ProfileChoice::Pec,
            "tabulated" | "table" => ProfileChoice::Tabulated,
            "modes" | "mode-synthesized" => ProfileChoice::Modes,
            other => {
                return Err(format!(
                    "unknown profile kind '{other}' (expected z1, z2, z3, pec, tabulated or modes)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Truncation,
    ThetaRDeg,
    FrequencyGhz,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Truncation => "N",
            SweepVariable::ThetaRDeg => "theta_r_deg",
            SweepVariable::FrequencyGhz => "frequency_ghz",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "N" | "n" | "truncation" => Ok(SweepVariable::Truncation),
            "theta_r_deg" | "theta_r" => Ok(SweepVariable::ThetaRDeg),
            "frequency_ghz" | "frequency" => Ok(SweepVariable::FrequencyGhz),
            other => Err(format!(
                "unknown sweep variable '{other}' (expected N, theta_r_deg or frequency_ghz)"
            )),
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frequency_ghz: f64,
    pub theta_i_deg: f64,
    pub theta_r_deg: f64,
    pub truncation: usize,
    pub periods_per_side: f64,
    pub grid_size: usize,
    pub output: Option<PathBuf>,
    pub profile: ProfileChoice,
    pub table: Option<PathBuf>,
    pub modes: Option<BTreeMap<i32, Complex64>>,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub table_points: usize,
    pub tolerance_scale: f64,
    pub inject_fault: bool,
}

/// Parses `"1=1+0i, 0=-1"` into an order-to-amplitude map.
pub fn parse_modes(text: &str) -> Result<BTreeMap<i32, Complex64>, String> {
    let mut modes = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (n, b) = part
            .split_once('=')
            .ok_or_else(|| format!("mode '{part}' is not of the form n=amplitude"))?;
        let n: i32 = n.trim().parse().map_err(|_| format!("bad mode index '{}'", n.trim()))?;
        let b: Complex64 = b
            .trim()
            .replace(' ', "")
            .parse()
            .map_err(|_| format!("bad complex amplitude '{}'", b.trim()))?;
        if modes.insert(n, b).is_some() {
            return Err(format!("mode {n} given twice"));
        }
    }
    if modes.is_empty() {
        return Err("mode list is empty".into());
    }
    Ok(modes)
}

pub fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_file_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_file_config(text: &str) -> Result<FileConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_angle(name: &str, deg: f64) -> Result<(), CliError> {
    if !deg.is_finite() || deg.abs() >= 90.0 {
        return Err(config_error(format!("{name} = {deg} must lie in (-90, 90) degrees")));
    }
    Ok(())
}

/// Merges file values, flag overrides and defaults, then validates.
/// `base_dir` anchors relative table paths from the file.
pub fn resolve(file: FileConfig, base_dir: Option<&Path>, flags: Overrides) -> Result<RunConfig, CliError> {
    let anchor = |p: PathBuf| match base_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    };
    let frequency_ghz = flags.frequency_ghz.or(file.frequency_ghz).unwrap_or(DEFAULT_FREQUENCY_GHZ);
    let theta_i_deg = flags.theta_i_deg.or(file.theta_i_deg).unwrap_or(DEFAULT_THETA_I_DEG);
    let theta_r_deg = flags.theta_r_deg.or(file.theta_r_deg).unwrap_or(DEFAULT_THETA_R_DEG);
    let truncation = flags.truncation.or(file.truncation).unwrap_or(DEFAULT_TRUNCATION);
    let periods_per_side = flags
        .periods_per_side
        .or(file.periods_per_side)
        .unwrap_or(DEFAULT_PERIODS_PER_SIDE);
    let grid_size = flags.grid_size.or(file.grid_size).unwrap_or(DEFAULT_GRID_SIZE);
    let output = flags.output.or(file.output);

    let kind = flags.profile.or(file.profile.kind).unwrap_or_else(|| "z3".into());
    let profile: ProfileChoice = kind.parse().map_err(config_error)?;
    let table = flags.table.or(file.profile.table.map(anchor));
    let modes_text = flags.modes.or(file.profile.modes);
    let modes = modes_text
        .as_deref()
        .map(parse_modes)
        .transpose()
        .map_err(|e| config_error(format!("modes: {e}")))?;

    let sweep_variable: SweepVariable = flags
        .sweep_variable
        .or(file.sweep.variable)
        .as_deref()
        .unwrap_or("N")
        .parse()
        .map_err(config_error)?;
    let sweep_values = flags
        .sweep_values
        .or(file.sweep.values)
        .unwrap_or_else(|| vec![10.0, 20.0, 30.0, 60.0]);
    let table_points = flags.table_points.or(file.design.table_points).unwrap_or(DEFAULT_TABLE_POINTS);
    let tolerance_scale = flags.tolerance_scale.or(file.verify.tolerance_scale).unwrap_or(1.0);
    let inject_fault = flags.inject_fault || file.verify.inject_fault.unwrap_or(false);

    if !(frequency_ghz.is_finite() && frequency_ghz > 0.0) {
        return Err(config_error(format!("frequency_ghz = {frequency_ghz} must be positive")));
    }
    check_angle("theta_i_deg", theta_i_deg)?;
    check_angle("theta_r_deg", theta_r_deg)?;
    if truncation > MAX_TRUNCATION {
        return Err(config_error(format!("truncation = {truncation} exceeds {MAX_TRUNCATION}")));
    }
    if !(periods_per_side.is_finite() && periods_per_side > 0.0) {
        return Err(config_error(format!("periods_per_side = {periods_per_side} must be positive")));
    }
    if grid_size < ris_floquet::far_field::MIN_GRID_SIZE {
        return Err(config_error(format!(
            "grid_size = {grid_size} must be at least {}",
            ris_floquet::far_field::MIN_GRID_SIZE
        )));
    }
    if table_points < 2 {
        return Err(config_error("design.table_points must be at least 2"));
    }
    if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
        return Err(config_error(format!("tolerance_scale = {tolerance_scale} must be positive")));
    }
    if sweep_values.is_empty() || sweep_values.iter().any(|v| !v.is_finite()) {
        return Err(config_error("sweep values must be a non-empty list of finite numbers"));
    }
    if sweep_variable == SweepVariable::Truncation
        && sweep_values.iter().any(|&v| v < 0.0 || v.fract() != 0.0 || v > MAX_TRUNCATION as f64)
    {
        return Err(config_error("N sweep values must be non-negative integers"));
    }
    match profile {
        ProfileChoice::Tabulated if table.is_none() => {
            return Err(config_error("profile kind 'tabulated' needs a table path"))
        }
        ProfileChoice::Tabulated if !table.as_deref().is_some_and(Path::is_file) => {
            return Err(config_error(format!(
                "table file {} not found",
                table.as_deref().unwrap_or(Path::new("")).display()
            )))
        }
        ProfileChoice::Modes if modes.is_none() => {
            return Err(config_error("profile kind 'modes' needs a mode list"))
        }
        _ => {}
    }

    Ok(RunConfig {
        frequency_ghz,
        theta_i_deg,
        theta_r_deg,
        truncation,
        periods_per_side,
        grid_size,
        output,
        profile,
        table,
        modes,
        sweep_variable,
        sweep_values,
        table_points,
        tolerance_scale,
        inject_fault,
    })
}

impl RunConfig {
    pub fn scenario(&self) -> ris_floquet::Result<ScatterScenario> {
        ScatterScenario::from_angles(
            self.frequency_ghz * 1e9,
            self.theta_i_deg.to_radians(),
            self.theta_r_deg.to_radians(),
            self.truncation,
            self.periods_per_side,
        )
    }

    pub fn build_profile(&self, scenario: &ScatterScenario) -> ris_floquet::Result<ImpedanceProfile> {
        match self.profile {
            ProfileChoice::Z1 => z1_cotangent(scenario),
            ProfileChoice::Z2 => z2_geometric_optics(scenario),
            ProfileChoice::Z3 => z3_global_optimal(scenario),
            ProfileChoice::Pec => constant(scenario.period(), Complex64::new(0.0, 0.0)),
            ProfileChoice::Tabulated => read_profile(self.table.as_deref().unwrap_or(Path::new(""))),
            ProfileChoice::Modes => synthesize_from_modes(scenario, self.modes.as_ref().unwrap_or(&BTreeMap::new())),
        }
    }

    /// `# key = value` lines echoing every resolved setting.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("frequency_ghz = {}", self.frequency_ghz),
            format!("theta_i_deg = {}", self.theta_i_deg),
            format!("theta_r_deg = {}", self.theta_r_deg),
            format!("truncation = {}", self.truncation),
            format!("periods_per_side = {}", self.periods_per_side),
            format!("grid_size = {}", self.grid_size),
            format!("profile.kind = {}", self.profile.as_str()),
        ];
        if let Some(t) = &self.table {
            lines.push(format!("profile.table = {}", t.display()));
        }
        if let Some(m) = &self.modes {
            lines.push(format!("profile.modes = {}", format_modes(m)));
        }
        lines
    }
}

pub fn format_modes(modes: &BTreeMap<i32, Complex64>) -> String {
    modes
        .iter()
        .map(|(n, b)| format!("{n}={}", ComplexText(*b)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// `a+bi` with round-trip precision, parseable by [`parse_modes`].
pub struct ComplexText(pub Complex64);

impl fmt::Display for ComplexText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Complex64 { re, im } = self.0;
        if im.is_sign_negative() {
            write!(f, "{}-{}i", Num(re), Num(-im))
        } else {
            write!(f, "{}+{}i", Num(re), Num(im))
        }
    }
}
