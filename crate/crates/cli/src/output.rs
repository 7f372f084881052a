//! CSV and table serialization. Every file starts with `#` comment lines
//! echoing the resolved configuration.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ris_floquet::far_field::FarFieldPattern;
use ris_floquet::power::PowerBudget;
use ris_floquet::{ModalSolution, ScatterScenario};

use crate::CliError;

pub const DB_FLOOR: f64 = -120.0;

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
pub struct Num(pub f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

pub fn comments<I, S>(out: &mut String, lines: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    for line in lines {
        let _ = writeln!(out, "# {}", line.as_ref());
    }
}

pub fn scenario_lines(scenario: &ScatterScenario) -> Vec<String> {
    vec![
        format!("wavelength_m = {:e}", scenario.wavelength()),
        format!("period_m = {:e}", scenario.period()),
        format!("aperture_m = {:e} x {:e}", 2.0 * scenario.aperture_half_x(), 2.0 * scenario.aperture_half_y()),
    ]
}

pub fn solve_csv(
    header: &[String],
    scenario: &ScatterScenario,
    solution: &ModalSolution,
    budget: &PowerBudget,
) -> String {
    let mut out = String::new();
    comments(&mut out, header);
    comments(&mut out, scenario_lines(scenario));
    let d = &solution.diagnostics;
    comments(
        &mut out,
        [
            format!("efficiency = {} (n = {})", Num(budget.efficiency), budget.target_index),
            format!("total_reflected = {}", Num(budget.total_reflected)),
            format!("surface_net = {}", Num(budget.surface_net)),
            format!("condition_estimate = {:e}", d.condition_estimate),
            format!("regularized = {} (rank {})", d.regularized, d.effective_rank),
        ],
    );
    out.push_str("n,Re(B_n),Im(B_n),abs(B_n),mode_class,theta_deg,power_fraction\n");
    for (n, b) in solution.iter() {
        let h = scenario.harmonic(n);
        let theta = h.angle.map(|a| format!("{:.6}", a.to_degrees())).unwrap_or_default();
        let fraction = budget.fractions.get(&n).copied().unwrap_or(0.0);
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{theta},{}",
            Num(b.re),
            Num(b.im),
            Num(b.norm()),
            h.mode_class.as_str(),
            Num(fraction)
        );
    }
    out
}

pub fn pattern_csv(header: &[String], scenario: &ScatterScenario, pattern: &FarFieldPattern) -> String {
    let mut out = String::new();
    comments(&mut out, header);
    comments(&mut out, scenario_lines(scenario));
    comments(
        &mut out,
        [
            format!(
                "peak_theta_deg = {:.6} (P_rad_rel = {:e})",
                pattern.peak_angle.to_degrees(),
                pattern.power[pattern.peak_index]
            ),
            format!("sinc_argument = {}", pattern.sinc_argument.as_str()),
            "P_rad_rel = radiated power in W/sr for |A0| = 1 V/m".to_string(),
            format!("normalized_dB floor = {DB_FLOOR}"),
        ],
    );
    out.push_str("theta_deg,normalized,normalized_dB,P_rad_rel\n");
    let db = pattern.normalized_db(DB_FLOOR);
    for (((theta, norm), db), power) in pattern.theta_grid.iter().zip(&pattern.normalized).zip(&db).zip(&pattern.power) {
        let _ = writeln!(out, "{:.6},{},{},{}", theta.to_degrees(), Num(*norm), Num(*db), Num(*power));
    }
    out
}

pub struct SweepLine {
    pub value: f64,
    pub outcome: Result<(f64, f64, f64), ris_floquet::Error>,
}

pub fn sweep_csv(header: &[String], variable: &str, rows: &[SweepLine]) -> String {
    let mut out = String::new();
    comments(&mut out, header);
    out.push_str("index,variable,value,efficiency,total_reflected,residual,status\n");
    for (i, row) in rows.iter().enumerate() {
        match &row.outcome {
            Ok((eff, total, residual)) => {
                let _ = writeln!(out, "{i},{variable},{},{},{},{residual:e},ok", row.value, Num(*eff), Num(*total));
            }
            Err(e) => {
                let msg = format!("error[{}]: {e}", e.category()).replace(',', ";");
                let _ = writeln!(out, "{i},{variable},{},,,,{msg}", row.value);
            }
        }
    }
    out
}

/// Writes to `path`, or standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
