//! Periodic surface-impedance profiles `Z_s(y)`.
//!
//! Three closed-form designs (cotangent, geometric-optics, globally optimal),
//! user tables, and profiles synthesized from prescribed reflected modes.
//! Every profile is `D`-periodic; evaluation reduces `y` to `[0, D)` first.

mod fourier;
pub mod table;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{floquet_phase, ScatterScenario};

pub use fourier::{
    default_grid_size, fourier_coefficients, verify_cotangent_series, CotangentSeries, Estimation,
    FourierImpedance,
};

/// Grid used to audit synthesized denominators.
pub const SYNTHESIS_AUDIT_POINTS: usize = 4096;

/// Default singular-denominator floor, relative to `cos(theta_i) / eta0`.
pub const SYNTHESIS_FLOOR_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Cotangent,
    GeometricOptics,
    GlobalOptimal,
    Tabulated,
    ModeSynthesized,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Cotangent => "cotangent",
            ProfileKind::GeometricOptics => "geometric-optics",
            ProfileKind::GlobalOptimal => "global-optimal",
            ProfileKind::Tabulated => "tabulated",
            ProfileKind::ModeSynthesized => "mode-synthesized",
        }
    }
}

/// The scenario parameters a profile was designed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioLink {
    pub theta_i: f64,
    pub theta_r: Option<f64>,
    pub wavenumber: f64,
    pub period: f64,
    pub eta0: f64,
}

impl From<&ScatterScenario> for ScenarioLink {
    fn from(s: &ScatterScenario) -> Self {
        Self {
            theta_i: s.theta_i(),
            theta_r: s.theta_r(),
            wavenumber: s.wavenumber(),
            period: s.period(),
            eta0: s.eta0(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Backing {
    /// `j z0 cot(alpha y)` with `alpha D = -order * pi`.
    Cotangent { z0: f64, alpha: f64, order: i32 },
    GeometricOptics { eta0: f64, cos_i: f64, cos_r: f64, order: i32 },
    GlobalOptimal { eta0: f64, sqrt_cos_i: f64, sqrt_cos_r: f64, order: i32 },
    Tabulated { samples: Vec<(f64, Complex64)> },
    ModeSynthesized { terms: Vec<SynthesisTerm>, incident_admittance: f64, floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SynthesisTerm {
    index: i32,
    amplitude: Complex64,
    admittance: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceProfile {
    kind: ProfileKind,
    period: f64,
    link: Option<ScenarioLink>,
    prescribed_modes: Option<BTreeMap<i32, Complex64>>,
    backing: Backing,
}

fn reject_mirror_geometry(cos_i: f64, cos_r: f64) -> Result<()> {
    let gap = (cos_i - cos_r).abs();
    if gap <= 1e-12 {
        // cos(theta_i) = cos(theta_r) puts the denominator zero at y = 0.
        return Err(Error::SingularProfile { y: 0.0, magnitude: gap });
    }
    Ok(())
}

/// `Z1(y) = j Z0 cot((k/2)(sin theta_i - sin theta_r) y)`, `Z0 = eta0 / cos theta_i`.
/// Purely reactive, with poles at `y = mD`.
pub fn z1_cotangent(scenario: &ScatterScenario) -> Result<ImpedanceProfile> {
    let theta_r = scenario.design_theta_r()?;
    let k = scenario.wavenumber();
    Ok(ImpedanceProfile {
        kind: ProfileKind::Cotangent,
        period: scenario.period(),
        link: Some(scenario.into()),
        prescribed_modes: None,
        backing: Backing::Cotangent {
            z0: scenario.eta0() / scenario.theta_i().cos(),
            alpha: 0.5 * k * (scenario.theta_i().sin() - theta_r.sin()),
            order: scenario.design_order(),
        },
    })
}

/// Geometric-optics design `Z2(y) = eta0 (1 + Psi) / (cos theta_i - Psi cos theta_r)`.
pub fn z2_geometric_optics(scenario: &ScatterScenario) -> Result<ImpedanceProfile> {
    let theta_r = scenario.design_theta_r()?;
    let (cos_i, cos_r) = (scenario.theta_i().cos(), theta_r.cos());
    reject_mirror_geometry(cos_i, cos_r)?;
    Ok(ImpedanceProfile {
        kind: ProfileKind::GeometricOptics,
        period: scenario.period(),
        link: Some(scenario.into()),
        prescribed_modes: None,
        backing: Backing::GeometricOptics {
            eta0: scenario.eta0(),
            cos_i,
            cos_r,
            order: scenario.design_order(),
        },
    })
}

/// Globally optimal design
/// `Z3(y) = eta0 / sqrt(ci cr) * (sqrt(cr) + sqrt(ci) Psi) / (sqrt(ci) - sqrt(cr) Psi)`.
pub fn z3_global_optimal(scenario: &ScatterScenario) -> Result<ImpedanceProfile> {
    let theta_r = scenario.design_theta_r()?;
    let (cos_i, cos_r) = (scenario.theta_i().cos(), theta_r.cos());
    reject_mirror_geometry(cos_i, cos_r)?;
    Ok(ImpedanceProfile {
        kind: ProfileKind::GlobalOptimal,
        period: scenario.period(),
        link: Some(scenario.into()),
        prescribed_modes: None,
        backing: Backing::GlobalOptimal {
            eta0: scenario.eta0(),
            sqrt_cos_i: cos_i.sqrt(),
            sqrt_cos_r: cos_r.sqrt(),
            order: scenario.design_order(),
        },
    })
}

/// Profile whose reflected field is exactly the prescribed set of modes:
///
/// `Z(y) = (1 + sum B_n Phi_n) / (cos theta_i / eta0 - sum Y_n B_n Phi_n)`.
pub fn synthesize_from_modes(
    scenario: &ScatterScenario,
    modes: &BTreeMap<i32, Complex64>,
) -> Result<ImpedanceProfile> {
    let floor = SYNTHESIS_FLOOR_FACTOR * scenario.theta_i().cos() / scenario.eta0();
    synthesize_from_modes_with_floor(scenario, modes, floor, SYNTHESIS_AUDIT_POINTS)
}

/// As [`synthesize_from_modes`] with an explicit denominator floor (siemens)
/// audited on `audit_points` aligned plus `audit_points` half-offset samples.
pub fn synthesize_from_modes_with_floor(
    scenario: &ScatterScenario,
    modes: &BTreeMap<i32, Complex64>,
    floor: f64,
    audit_points: usize,
) -> Result<ImpedanceProfile> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument("mode set is empty".into()));
    }
    if modes.values().any(|b| !(b.re.is_finite() && b.im.is_finite())) {
        return Err(Error::InvalidArgument("mode amplitudes must be finite".into()));
    }
    if audit_points == 0 {
        return Err(Error::InvalidArgument("audit grid must be non-empty".into()));
    }
    let terms = modes
        .iter()
        .map(|(&index, &amplitude)| SynthesisTerm {
            index,
            amplitude,
            admittance: scenario.harmonic(index).admittance,
        })
        .collect();
    let profile = ImpedanceProfile {
        kind: ProfileKind::ModeSynthesized,
        period: scenario.period(),
        link: Some(scenario.into()),
        prescribed_modes: Some(modes.clone()),
        backing: Backing::ModeSynthesized {
            terms,
            incident_admittance: scenario.theta_i().cos() / scenario.eta0(),
            floor,
        },
    };
    let d = scenario.period();
    let (y_min, den_min) = (0..2 * audit_points)
        .map(|m| {
            let y = m as f64 * d / (2 * audit_points) as f64;
            (y, profile.synthesis_denominator(y).norm())
        })
        .fold((0.0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
    if den_min < floor {
        return Err(Error::SingularProfile { y: y_min, magnitude: den_min });
    }
    Ok(profile)
}

/// Periodic, linearly interpolated table. `y` must be strictly increasing in `[0, D)`.
pub fn load_tabulated(period: f64, samples: Vec<(f64, Complex64)>) -> Result<ImpedanceProfile> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::MalformedTable(format!("period must be positive, got {period}")));
    }
    if samples.len() < 2 {
        return Err(Error::MalformedTable(format!("need at least 2 samples, got {}", samples.len())));
    }
    for (i, &(y, z)) in samples.iter().enumerate() {
        if !y.is_finite() || !(0.0..period).contains(&y) {
            return Err(Error::MalformedTable(format!("sample {i}: y = {y} outside [0, {period})")));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::MalformedTable(format!("sample {i}: non-finite impedance")));
        }
        if i > 0 && y <= samples[i - 1].0 {
            return Err(Error::MalformedTable(format!("sample {i}: y = {y} not strictly increasing")));
        }
    }
    Ok(ImpedanceProfile {
        kind: ProfileKind::Tabulated,
        period,
        link: None,
        prescribed_modes: None,
        backing: Backing::Tabulated { samples },
    })
}

/// Spatially uniform impedance, stored as a two-point table.
pub fn constant(period: f64, z: Complex64) -> Result<ImpedanceProfile> {
    load_tabulated(period, vec![(0.0, z), (0.5 * period, z)])
}

impl ImpedanceProfile {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn scenario_link(&self) -> Option<&ScenarioLink> {
        self.link.as_ref()
    }

    pub fn prescribed_modes(&self) -> Option<&BTreeMap<i32, Complex64>> {
        self.prescribed_modes.as_ref()
    }

    /// Table samples for tabulated profiles.
    pub fn samples(&self) -> Option<&[(f64, Complex64)]> {
        match &self.backing {
            Backing::Tabulated { samples } => Some(samples),
            _ => None,
        }
    }

    /// `Z0 = eta0 / cos(theta_i)` for the cotangent design.
    pub fn cotangent_reference(&self) -> Option<f64> {
        match self.backing {
            Backing::Cotangent { z0, .. } => Some(z0),
            _ => None,
        }
    }

    pub(crate) fn cotangent_order(&self) -> Option<i32> {
        match self.backing {
            Backing::Cotangent { order, .. } => Some(order),
            _ => None,
        }
    }

    fn synthesis_denominator(&self, y: f64) -> Complex64 {
        match &self.backing {
            Backing::ModeSynthesized { terms, incident_admittance, .. } => terms
                .iter()
                .fold(Complex64::new(*incident_admittance, 0.0), |acc, t| {
                    acc - t.admittance * t.amplitude * floquet_phase(self.period, t.index, y)
                }),
            _ => Complex64::new(1.0, 0.0),
        }
    }

    /// Evaluates `Z_s(y)` in ohms.
    pub fn eval(&self, y: f64) -> Result<Complex64> {
        if !y.is_finite() {
            return Err(Error::NonFiniteSample { y });
        }
        let d = self.period;
        let t = y.rem_euclid(d);
        let z = match &self.backing {
            Backing::Cotangent { z0, alpha, .. } => {
                if t == 0.0 {
                    return Err(Error::EvaluationAtPole { y });
                }
                let x = alpha * t;
                Complex64::new(0.0, z0 * x.cos() / x.sin())
            }
            Backing::GeometricOptics { eta0, cos_i, cos_r, order } => {
                let psi = floquet_phase(d, *order, t);
                let den = *cos_i - psi * *cos_r;
                if den.norm() == 0.0 {
                    return Err(Error::SingularProfile { y, magnitude: 0.0 });
                }
                *eta0 * (1.0 + psi) / den
            }
            Backing::GlobalOptimal { eta0, sqrt_cos_i, sqrt_cos_r, order } => {
                let psi = floquet_phase(d, *order, t);
                let den = *sqrt_cos_i - psi * *sqrt_cos_r;
                if den.norm() == 0.0 {
                    return Err(Error::SingularProfile { y, magnitude: 0.0 });
                }
                let scale = *eta0 / (sqrt_cos_i * sqrt_cos_r);
                scale * (*sqrt_cos_r + psi * *sqrt_cos_i) / den
            }
            Backing::Tabulated { samples } => interpolate_periodic(samples, d, t),
            Backing::ModeSynthesized { terms, floor, .. } => {
                let num = terms.iter().fold(Complex64::new(1.0, 0.0), |acc, term| {
                    acc + term.amplitude * floquet_phase(d, term.index, t)
                });
                let den = self.synthesis_denominator(t);
                if den.norm() < *floor {
                    return Err(Error::SingularProfile { y, magnitude: den.norm() });
                }
                num / den
            }
        };
        Ok(z)
    }

    /// Samples the profile at `y_m = m D / points`, `m = 0..points`.
    pub fn sample_table(&self, points: usize) -> Result<Vec<(f64, Complex64)>> {
        (0..points)
            .map(|m| {
                let y = m as f64 * self.period / points as f64;
                self.eval(y).map(|z| (y, z))
            })
            .collect()
    }
}

fn interpolate_periodic(samples: &[(f64, Complex64)], period: f64, t: f64) -> Complex64 {
    let upper = samples.partition_point(|&(y, _)| y <= t);
    let ((y0, z0), (y1, z1)) = if upper == 0 {
        let (yl, zl) = samples[samples.len() - 1];
        ((yl - period, zl), samples[0])
    } else if upper == samples.len() {
        let (yf, zf) = samples[0];
        (samples[upper - 1], (yf + period, zf))
    } else {
        (samples[upper - 1], samples[upper])
    };
    let w = (t - y0) / (y1 - y0);
    z0 + (z1 - z0) * w
}
