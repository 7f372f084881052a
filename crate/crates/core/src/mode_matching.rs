//! Truncated mode matching: Toeplitz impedance matrix, modal admittances,
//! reflection matrix `Gamma = (I + Zs Ya)^-1 (Zs Ya - I)` and `b = Gamma a`.
//!
//! Rows and columns are ordered by harmonic index `-N..=N`; harmonic `n`
//! lives at position `n + N`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ScatterScenario;
use crate::profile::{default_grid_size, fourier_coefficients, FourierImpedance, ImpedanceProfile};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `Zs[n, m] = z_{n-m}`. Needs `z_p` for `|p| <= 2N`.
pub fn toeplitz_matrix(fourier: &FourierImpedance, truncation: usize) -> Result<DMatrix<Complex64>> {
    let size = 2 * truncation + 1;
    let needed = 2 * truncation as i64;
    if fourier.max_order() < 2 * truncation {
        return Err(Error::MissingCoefficient { p: needed.min(fourier.max_order() as i64 + 1) });
    }
    let diagonals = (-needed..=needed)
        .map(|p| fourier.coefficient(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(size, size, |r, c| diagonals[(r as i64 - c as i64 + needed) as usize]))
}

/// `diag(Y_-N, ..., Y_N)` plus the orders flagged as grazing.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalAdmittance {
    pub diagonal: DVector<Complex64>,
    pub grazing: Vec<i32>,
}

impl ModalAdmittance {
    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&self.diagonal)
    }
}

pub fn admittance_matrix(scenario: &ScatterScenario, truncation: usize) -> ModalAdmittance {
    let n = truncation as i32;
    let harmonics: Vec<_> = (-n..=n).map(|i| scenario.harmonic(i)).collect();
    ModalAdmittance {
        diagonal: DVector::from_iterator(harmonics.len(), harmonics.iter().map(|h| h.admittance)),
        grazing: harmonics.iter().filter(|h| h.grazing).map(|h| h.index).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Condition number above which the plain LU solve is not trusted.
    pub condition_limit: f64,
    /// Above the limit, fall back to a truncated-SVD (minimum-norm) solve
    /// instead of failing with `SingularSystem`.
    pub regularize: bool,
    /// Singular values below `rcond * sigma_max` are dropped in the fallback.
    pub rcond: f64,
    /// DFT grid; `None` uses [`default_grid_size`].
    pub fourier_grid: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            condition_limit: 1e14,
            regularize: true,
            rcond: 1e-13,
            fourier_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    pub gamma: DMatrix<Complex64>,
    /// 2-norm condition number of `I + Zs Ya`.
    pub condition_estimate: f64,
    /// Number of singular directions kept (full size unless regularized).
    pub effective_rank: usize,
    pub regularized: bool,
}

pub fn reflection_matrix(zs: &DMatrix<Complex64>, ya: &DMatrix<Complex64>) -> Result<Reflection> {
    reflection_matrix_with(zs, ya, &SolverOptions::default())
}

/// Solves `(I + Zs Ya) Gamma = Zs Ya - I` against all `2N+1` columns.
pub fn reflection_matrix_with(
    zs: &DMatrix<Complex64>,
    ya: &DMatrix<Complex64>,
    options: &SolverOptions,
) -> Result<Reflection> {
    let size = zs.nrows();
    if zs.ncols() != size || ya.shape() != (size, size) {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: Zs {:?}, Ya {:?}",
            zs.shape(),
            ya.shape()
        )));
    }
    let zy = zs * ya;
    let identity = DMatrix::<Complex64>::identity(size, size);
    let system = &identity + &zy;
    let rhs = &zy - &identity;
    if system.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SingularSystem { condition: f64::INFINITY });
    }

    let svd = system.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let condition = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
    if sigma_max.is_nan() || sigma_max <= 0.0 {
        return Err(Error::SingularSystem { condition });
    }

    if condition <= options.condition_limit {
        let gamma = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularSystem { condition })?;
        return Ok(Reflection {
            gamma,
            condition_estimate: condition,
            effective_rank: size,
            regularized: false,
        });
    }
    if !options.regularize {
        return Err(Error::SingularSystem { condition });
    }
    let cutoff = options.rcond * sigma_max;
    let effective_rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let gamma = svd
        .solve(&rhs, cutoff)
        .map_err(|_| Error::SingularSystem { condition })?;
    Ok(Reflection {
        gamma,
        condition_estimate: condition,
        effective_rank,
        regularized: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub condition_estimate: f64,
    /// `||(I + Zs Ya) b - (Zs Ya - I) a|| / ||a||`.
    pub residual_norm: f64,
    pub grazing_warnings: Vec<i32>,
    pub effective_rank: usize,
    pub regularized: bool,
    /// Some propagating order lies outside `-N..=N`.
    pub truncation_warning: bool,
}

/// Reflected amplitudes `B_-N..B_N` normalized to the incident amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalSolution {
    truncation: usize,
    amplitudes: Vec<Complex64>,
    pub diagnostics: SolverDiagnostics,
}

impl ModalSolution {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Always 0: the incident wave feeds the fundamental order.
    pub fn incident_index(&self) -> i32 {
        0
    }

    pub fn amplitude(&self, n: i32) -> Option<Complex64> {
        let idx = n as i64 + self.truncation as i64;
        (n.unsigned_abs() as usize <= self.truncation).then(|| self.amplitudes[idx as usize])
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `(n, B_n)` in ascending `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let n = self.truncation as i32;
        self.amplitudes.iter().enumerate().map(move |(i, &b)| (i as i32 - n, b))
    }
}

pub fn solve(profile: &ImpedanceProfile, scenario: &ScatterScenario) -> Result<ModalSolution> {
    solve_with(profile, scenario, &SolverOptions::default())
}

pub fn solve_with(
    profile: &ImpedanceProfile,
    scenario: &ScatterScenario,
    options: &SolverOptions,
) -> Result<ModalSolution> {
    let (dp, ds) = (profile.period(), scenario.period());
    if (dp - ds).abs() > 1e-9 * ds {
        return Err(Error::GeometryMismatch { profile: dp, scenario: ds });
    }
    let max_order = 2 * scenario.truncation();
    let grid = options.fourier_grid.unwrap_or_else(|| default_grid_size(max_order));
    let fourier = fourier_coefficients(profile, max_order, grid)?;
    solve_fourier(&fourier, scenario, options)
}

/// Solves from precomputed coefficients (e.g. the analytic cotangent series).
pub fn solve_fourier(
    fourier: &FourierImpedance,
    scenario: &ScatterScenario,
    options: &SolverOptions,
) -> Result<ModalSolution> {
    let truncation = scenario.truncation();
    let zs = toeplitz_matrix(fourier, truncation)?;
    let admittance = admittance_matrix(scenario, truncation);
    let ya = admittance.matrix();
    let reflection = reflection_matrix_with(&zs, &ya, options)?;

    let b: DVector<Complex64> = reflection.gamma.column(truncation).into_owned();
    let size = 2 * truncation + 1;
    let mut a = DVector::<Complex64>::zeros(size);
    a[truncation] = ONE;
    let zy = &zs * &ya;
    let residual = (&b + &zy * &b) - (&zy * &a - &a);

    Ok(ModalSolution {
        truncation,
        amplitudes: b.iter().copied().collect(),
        diagnostics: SolverDiagnostics {
            condition_estimate: reflection.condition_estimate,
            residual_norm: residual.norm() / a.norm(),
            grazing_warnings: admittance.grazing,
            effective_rank: reflection.effective_rank,
            regularized: reflection.regularized,
            truncation_warning: !scenario.truncation_covers_propagating(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    /// `B_n` for the retained propagating orders.
    pub propagating: BTreeMap<i32, Complex64>,
    pub residual_norm: f64,
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub truncation: usize,
    pub outcome: Result<ConvergencePoint>,
}

/// One independent solve per truncation order; failures are kept per row.
pub fn convergence_sweep(
    profile: &ImpedanceProfile,
    scenario: &ScatterScenario,
    truncations: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if truncations.is_empty() {
        return Err(Error::InvalidArgument("truncation list is empty".into()));
    }
    if truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("truncation list must be strictly ascending".into()));
    }
    Ok(truncations
        .par_iter()
        .map(|&n| {
            let s = scenario.with_truncation(n);
            let outcome = solve(profile, &s).map(|sol| ConvergencePoint {
                propagating: s
                    .retained_propagating_indices()
                    .into_iter()
                    .filter_map(|i| sol.amplitude(i).map(|b| (i, b)))
                    .collect(),
                residual_norm: sol.diagnostics.residual_norm,
                condition_estimate: sol.diagnostics.condition_estimate,
            });
            ConvergenceRow { truncation: n, outcome }
        })
        .collect())
}
