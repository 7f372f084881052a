//! Point-matching oracle for the boundary condition and the invariant suite.
//!
//! The oracle samples `Z_s(y)` directly and enforces
//! `sum_n (a_n + b_n) Phi_n(y) = Z_s(y) sum_n Y_n (a_n - b_n) Phi_n(y)`
//! at half-offset points in the least-squares sense. It shares nothing with
//! the Toeplitz assembly beyond harmonic admittances and profile evaluation.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ScatterScenario;
use crate::mode_matching::{solve, solve_fourier, ModalSolution, SolverOptions};
use crate::power::power_budget;
use crate::profile::{
    constant, default_grid_size, fourier_coefficients, synthesize_from_modes, verify_cotangent_series,
    z1_cotangent, z2_geometric_optics, z3_global_optimal, ImpedanceProfile,
};

/// Columns whose QR pivot falls below this fraction of the largest are
/// treated as numerically dependent.
pub const RANK_TOLERANCE: f64 = 1e-13;

pub const DEFAULT_COLLOCATION_POINTS: usize = 512;

fn half_offset(period: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |m| (m as f64 + 0.5) * period / points as f64)
}

/// Row weight `1 / (1 + |Z| / eta0)`: keeps rows near impedance poles bounded.
fn row_weight(z: Complex64, eta0: f64) -> f64 {
    1.0 / (1.0 + z.norm() / eta0)
}

struct Row {
    z: Complex64,
    weight: f64,
    phases: Vec<Complex64>,
}

fn sample_rows(profile: &ImpedanceProfile, scenario: &ScatterScenario, truncation: usize, points: usize) -> Result<Vec<Row>> {
    let n = truncation as i32;
    half_offset(scenario.period(), points)
        .map(|y| {
            let z = profile.eval(y)?;
            Ok(Row {
                z,
                weight: row_weight(z, scenario.eta0()),
                phases: (-n..=n).map(|i| scenario.phi(i, y)).collect(),
            })
        })
        .collect()
}

/// Weighted residual `w(y) |E_t(y) + Z_s(y) H_t(y)| / |A0|` of the amplitudes
/// `b_{-N..N}`, maximized over the rows.
fn max_residual(rows: &[Row], admittances: &[Complex64], y0: Complex64, b: &[Complex64]) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    rows.iter()
        .map(|r| {
            let lhs: Complex64 = r
                .phases
                .iter()
                .zip(admittances)
                .zip(b)
                .map(|((&ph, &y), &bn)| bn * ph * (one + r.z * y))
                .sum();
            r.weight * (lhs - (r.z * y0 - one)).norm()
        })
        .fold(0.0, f64::max)
}

fn admittances(scenario: &ScatterScenario, truncation: usize) -> Vec<Complex64> {
    let n = truncation as i32;
    (-n..=n).map(|i| scenario.harmonic(i).admittance).collect()
}

/// Least-squares point matching with `points` collocation samples.
/// Returns `B_{-N..N}` keyed by order.
pub fn collocation_solve(
    profile: &ImpedanceProfile,
    scenario: &ScatterScenario,
    truncation: usize,
    points: usize,
) -> Result<BTreeMap<i32, Complex64>> {
    collocation_with_residual(profile, scenario, truncation, points).map(|(b, _)| b)
}

fn collocation_with_residual(
    profile: &ImpedanceProfile,
    scenario: &ScatterScenario,
    truncation: usize,
    points: usize,
) -> Result<(BTreeMap<i32, Complex64>, f64)> {
    let unknowns = 2 * truncation + 1;
    if points < 2 * unknowns {
        return Err(Error::InvalidArgument(format!(
            "need at least {} collocation points for N = {truncation}, got {points}",
            2 * unknowns
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let rows = sample_rows(profile, scenario, truncation, points)?;
    let ys = admittances(scenario, truncation);
    let y0 = ys[truncation];

    let a = DMatrix::from_fn(points, unknowns, |m, n| {
        let r = &rows[m];
        r.phases[n] * (one + r.z * ys[n]) * r.weight
    });
    let rhs = DVector::from_iterator(points, rows.iter().map(|r| (r.z * y0 - one) * r.weight));

    let qr = a.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..unknowns).map(|i| r[(i, i)].norm()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
    if ratio.is_nan() || ratio <= RANK_TOLERANCE {
        return Err(Error::RankDeficient { ratio });
    }
    let qtb = qr.q().adjoint() * rhs;
    let b = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficient { ratio })?;

    let b: Vec<Complex64> = b.iter().copied().collect();
    let residual = max_residual(&rows, &ys, y0, &b);
    let n = truncation as i32;
    Ok(((-n..=n).zip(b).collect(), residual))
}

/// Weighted boundary residual of a Toeplitz solution at `points` half-offset samples.
pub fn boundary_residual(
    profile: &ImpedanceProfile,
    scenario: &ScatterScenario,
    solution: &ModalSolution,
    points: usize,
) -> Result<f64> {
    let truncation = solution.truncation();
    let rows = sample_rows(profile, scenario, truncation, points)?;
    let ys = admittances(scenario, truncation);
    Ok(max_residual(&rows, &ys, ys[truncation], solution.amplitudes()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub amplitudes: BTreeMap<i32, Complex64>,
    /// Weighted, see [`boundary_residual`].
    pub max_boundary_residual: f64,
    /// `|B_n^oracle - B_n^toeplitz|` for retained propagating orders.
    pub comparison: BTreeMap<i32, f64>,
}

impl OracleReport {
    pub fn max_deviation(&self) -> f64 {
        self.comparison.values().copied().fold(0.0, f64::max)
    }
}

/// Collocation at the scenario truncation against [`solve`].
pub fn compare_with_toeplitz(
    profile: &ImpedanceProfile,
    scenario: &ScatterScenario,
    points: usize,
) -> Result<OracleReport> {
    let (amplitudes, max_boundary_residual) =
        collocation_with_residual(profile, scenario, scenario.truncation(), points)?;
    let toeplitz = solve(profile, scenario)?;
    let comparison = scenario
        .retained_propagating_indices()
        .into_iter()
        .map(|n| (n, (amplitudes[&n] - toeplitz.amplitude(n).unwrap_or_default()).norm()))
        .collect();
    Ok(OracleReport {
        amplitudes,
        max_boundary_residual,
        comparison,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported but not gating.
    Info,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: &'static str,
    pub tolerance: f64,
    pub value: f64,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    /// One CSV record per check: `name,tolerance,value,status,detail`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name,tolerance,value,status,detail")?;
        for c in &self.checks {
            writeln!(
                f,
                "{},{:e},{:e},{},{}",
                c.name,
                c.tolerance,
                c.value,
                c.status.as_str(),
                c.detail.replace(',', ";")
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
    /// Adds a real part to `z_1` before the lossless-conservation solve.
    pub inject_fault: bool,
    pub collocation_points: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            inject_fault: false,
            collocation_points: DEFAULT_COLLOCATION_POINTS,
        }
    }
}

pub fn run_invariant_suite(scenario: &ScatterScenario) -> SuiteReport {
    run_invariant_suite_with(scenario, &SuiteOptions::default())
}

type Measure = fn(&ScatterScenario, &SuiteOptions) -> Result<(f64, String)>;

struct Check {
    name: &'static str,
    tolerance: f64,
    gating: bool,
    measure: Measure,
}

const CHECKS: &[Check] = &[
    Check { name: "pec_limit", tolerance: 1e-12, gating: true, measure: pec_limit },
    Check { name: "matched_limit", tolerance: 1e-12, gating: true, measure: matched_limit },
    Check { name: "constant_load", tolerance: 1e-12, gating: true, measure: constant_load },
    Check { name: "z1_power_conservation", tolerance: 1e-6, gating: true, measure: z1_conservation },
    Check { name: "z2_round_trip", tolerance: 1e-3, gating: true, measure: z2_round_trip },
    Check { name: "z3_round_trip", tolerance: 2e-3, gating: true, measure: z3_round_trip },
    Check { name: "synthesis_round_trip", tolerance: 1e-6, gating: true, measure: synthesis_round_trip },
    Check { name: "z2_oracle", tolerance: 1e-4, gating: true, measure: z2_oracle },
    Check { name: "z3_oracle", tolerance: 1e-4, gating: true, measure: z3_oracle },
    Check { name: "z1_oracle", tolerance: 1e-4, gating: false, measure: z1_oracle },
    Check { name: "cotangent_analytic_series", tolerance: 1e-6, gating: true, measure: cotangent_series },
    Check { name: "z3_convergence_monotone", tolerance: 1e-9, gating: true, measure: z3_convergence },
    Check { name: "expected_rejection", tolerance: 0.0, gating: true, measure: expected_rejection },
];

/// Runs every check independently; a check that errors is reported as failed.
pub fn run_invariant_suite_with(scenario: &ScatterScenario, options: &SuiteOptions) -> SuiteReport {
    let checks = CHECKS
        .par_iter()
        .map(|c| {
            let tolerance = c.tolerance * options.tolerance_scale;
            let (value, passed, detail) = match (c.measure)(scenario, options) {
                Ok((value, detail)) => (value, value <= tolerance, detail),
                Err(e) => (f64::INFINITY, false, format!("error[{}]: {e}", e.category())),
            };
            let status = match (passed, c.gating) {
                (_, false) => CheckStatus::Info,
                (true, true) => CheckStatus::Pass,
                (false, true) => CheckStatus::Fail,
            };
            CheckRecord { name: c.name, tolerance, value, status, detail }
        })
        .collect();
    SuiteReport { checks }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn others_max(sol: &ModalSolution, skip: i32) -> f64 {
    sol.iter().filter(|(n, _)| *n != skip).map(|(_, b)| b.norm()).fold(0.0, f64::max)
}

fn pec_limit(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let sol = solve(&constant(s.period(), c(0.0, 0.0))?, s)?;
    let b0 = sol.amplitude(0).unwrap_or_default();
    Ok(((b0 + 1.0).norm().max(others_max(&sol, 0)), format!("B0 = {b0}")))
}

fn matched_limit(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let z = s.eta0() / s.theta_i().cos();
    let sol = solve(&constant(s.period(), c(z, 0.0))?, s)?;
    let worst = sol.iter().map(|(_, b)| b.norm()).fold(0.0, f64::max);
    Ok((worst, format!("Z = eta0/cos(theta_i) = {z:.6} ohm")))
}

fn constant_load(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let z = c(50.0, 30.0);
    let sol = solve(&constant(s.period(), z)?, s)?;
    let zy = z * s.harmonic(0).admittance;
    let expected = (zy - 1.0) / (zy + 1.0);
    let b0 = sol.amplitude(0).unwrap_or_default();
    Ok(((b0 - expected).norm().max(others_max(&sol, 0)), format!("B0 = {b0}")))
}

fn z1_conservation(s: &ScatterScenario, o: &SuiteOptions) -> Result<(f64, String)> {
    let profile = z1_cotangent(s)?;
    let order = 2 * s.truncation();
    let mut fourier = fourier_coefficients(&profile, order, default_grid_size(order))?;
    if o.inject_fault {
        let z1 = fourier.coefficient(1)?;
        fourier = fourier.with_coefficient(1, z1 + 0.5 * s.eta0())?;
    }
    let sol = solve_fourier(&fourier, s, &SolverOptions::default())?;
    let b = power_budget(&sol, s);
    Ok((b.surface_net.abs(), format!("total_reflected = {:.12}", b.total_reflected)))
}

fn single_mode_round_trip(s: &ScatterScenario, profile: &ImpedanceProfile, expected: f64) -> Result<(f64, String)> {
    let sol = solve(profile, s)?;
    let target = s.design_order();
    let bt = sol.amplitude(target).unwrap_or_default();
    let worst = (bt - expected).norm().max(others_max(&sol, target));
    Ok((worst, format!("B{target} = {bt}")))
}

fn z2_round_trip(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    single_mode_round_trip(s, &z2_geometric_optics(s)?, 1.0)
}

fn z3_round_trip(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let expected = (s.theta_i().cos() / s.design_theta_r()?.cos()).sqrt();
    single_mode_round_trip(s, &z3_global_optimal(s)?, expected)
}

/// Three propagating orders with moderate amplitudes.
fn synthesis_round_trip(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let modes: BTreeMap<i32, Complex64> = s
        .retained_propagating_indices()
        .into_iter()
        .zip([c(0.3, -0.2), c(-0.1, 0.25), c(0.6, 0.1), c(0.05, 0.05)])
        .collect();
    let sol = solve(&synthesize_from_modes(s, &modes)?, s)?;
    let worst = sol
        .iter()
        .map(|(n, b)| (b - modes.get(&n).copied().unwrap_or_default()).norm())
        .fold(0.0, f64::max);
    Ok((worst, format!("{} prescribed orders", modes.len())))
}

fn oracle(s: &ScatterScenario, o: &SuiteOptions, profile: &ImpedanceProfile) -> Result<(f64, String)> {
    let report = compare_with_toeplitz(profile, s, o.collocation_points)?;
    let detail = report
        .comparison
        .iter()
        .map(|(n, d)| format!("n={n}: {d:.3e}"))
        .collect::<Vec<_>>()
        .join(" ");
    Ok((report.max_deviation(), format!("{detail} residual={:.3e}", report.max_boundary_residual)))
}

fn z1_oracle(s: &ScatterScenario, o: &SuiteOptions) -> Result<(f64, String)> {
    oracle(s, o, &z1_cotangent(s)?)
}

fn z2_oracle(s: &ScatterScenario, o: &SuiteOptions) -> Result<(f64, String)> {
    oracle(s, o, &z2_geometric_optics(s)?)
}

fn z3_oracle(s: &ScatterScenario, o: &SuiteOptions) -> Result<(f64, String)> {
    oracle(s, o, &z3_global_optimal(s)?)
}

fn cotangent_series(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let profile = z1_cotangent(s)?;
    let order = 2 * s.truncation();
    let series = verify_cotangent_series(&profile, order, default_grid_size(order))?;
    let z0 = profile.cotangent_reference().unwrap_or(1.0).abs();
    Ok((series.max_deviation() / z0, format!("orders |p| <= {order}")))
}

/// Largest increase of `|B_target - exact|` along `N = 5, 10, 20, N_scenario`.
fn z3_convergence(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let profile = z3_global_optimal(s)?;
    let exact = (s.theta_i().cos() / s.design_theta_r()?.cos()).sqrt();
    let target = s.design_order();
    let mut ladder: Vec<usize> = [5, 10, 20].into_iter().filter(|&n| n < s.truncation()).collect();
    ladder.push(s.truncation());
    let errors = ladder
        .iter()
        .map(|&n| {
            let sol = solve(&profile, &s.with_truncation(n))?;
            Ok((sol.amplitude(target).unwrap_or_default() - exact).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errors.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
    let listed: Vec<String> = errors.iter().map(|e| format!("{e:.3e}")).collect();
    Ok((worst, format!("N {ladder:?} errors {}", listed.join(" "))))
}

/// A mirror-symmetric geometry must make the geometric-optics design singular.
fn expected_rejection(s: &ScatterScenario, _: &SuiteOptions) -> Result<(f64, String)> {
    let mirror = ScatterScenario::from_angles(s.frequency(), 20f64.to_radians(), -20f64.to_radians(), 10, 5.0)?;
    match z2_geometric_optics(&mirror) {
        Err(Error::SingularProfile { y, .. }) => Ok((0.0, format!("SingularProfile at y = {y:e}"))),
        Err(e) => Ok((1.0, format!("unexpected error: {e}"))),
        Ok(_) => Ok((1.0, "profile was accepted".into())),
    }
}
