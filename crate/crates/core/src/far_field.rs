//! Far-field angular factor, radiated power and normalized patterns.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ScatterScenario;
use crate::mode_matching::ModalSolution;

pub const DEFAULT_GRID_SIZE: usize = 1801;
pub const MIN_GRID_SIZE: usize = 181;

/// `sin(x)/x` with the Taylor series near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// How the aperture argument enters the sinc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SincArgument {
    /// `sinc(k L_y (sin theta - sin theta_n))`, no factor 1/2.
    Literal,
}

impl SincArgument {
    pub fn as_str(self) -> &'static str {
        match self {
            SincArgument::Literal => "literal k*Ly*(sin(theta)-sin(theta_n))",
        }
    }
}

struct Term {
    sin: f64,
    cos: f64,
    amplitude: Complex64,
}

fn reflected_terms(solution: &ModalSolution, scenario: &ScatterScenario) -> Vec<Term> {
    debug_assert_eq!(solution.truncation(), scenario.truncation());
    scenario
        .retained_propagating_indices()
        .into_iter()
        .filter_map(|n| {
            let h = scenario.harmonic(n);
            let angle = h.angle?;
            Some(Term {
                sin: angle.sin(),
                cos: angle.cos(),
                amplitude: solution.amplitude(n)?,
            })
        })
        .collect()
}

fn factor_at(scenario: &ScatterScenario, terms: &[Term], theta: f64) -> Complex64 {
    let kly = scenario.wavenumber() * scenario.aperture_half_y();
    let (s, c) = theta.sin_cos();
    let ti = scenario.theta_i();
    let incident = (c - ti.cos()) * sinc(kly * (s - ti.sin()));
    terms.iter().fold(Complex64::new(incident, 0.0), |acc, t| {
        acc + t.amplitude * ((c + t.cos) * sinc(kly * (s - t.sin)))
    })
}

/// `F(theta)`: incident term plus one term per propagating reflected order.
pub fn pattern_factor(solution: &ModalSolution, scenario: &ScatterScenario, theta: f64) -> Complex64 {
    factor_at(scenario, &reflected_terms(solution, scenario), theta)
}

/// `k^2 |A0|^2 S^2 / (32 pi^2 eta0)`, W/sr per unit `|F|^2`.
pub fn radiation_prefactor(wavenumber: f64, a0: f64, area: f64, eta0: f64) -> f64 {
    wavenumber * wavenumber * a0 * a0 * area * area / (32.0 * PI * PI * eta0)
}

/// Radiated power per unit solid angle, W/sr, for incident amplitude `a0` (V/m).
pub fn radiated_power(solution: &ModalSolution, scenario: &ScatterScenario, a0: f64, theta: f64) -> f64 {
    let f = pattern_factor(solution, scenario, theta);
    radiation_prefactor(scenario.wavenumber(), a0, scenario.area(), scenario.eta0()) * f.norm_sqr()
}

/// Pattern sampled on a uniform grid over `[-90deg, 90deg]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub theta_grid: Vec<f64>,
    pub factor: Vec<Complex64>,
    /// W/sr for `|A0| = 1 V/m`.
    pub power: Vec<f64>,
    /// `|F|^2 / max |F|^2`.
    pub normalized: Vec<f64>,
    pub peak_index: usize,
    pub peak_angle: f64,
    pub sinc_argument: SincArgument,
}

impl FarFieldPattern {
    pub fn step(&self) -> f64 {
        PI / (self.theta_grid.len() - 1) as f64
    }

    /// `10 log10(normalized)` floored at `floor_db`.
    pub fn normalized_db(&self, floor_db: f64) -> Vec<f64> {
        self.normalized
            .iter()
            .map(|&v| if v > 0.0 { (10.0 * v.log10()).max(floor_db) } else { floor_db })
            .collect()
    }

    /// Interior grid points strictly above both neighbours.
    pub fn local_maxima(&self) -> Vec<usize> {
        let v = &self.normalized;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
            .collect()
    }

    /// Index of the grid point closest to `theta`.
    pub fn index_of(&self, theta: f64) -> usize {
        let i = ((theta + PI / 2.0) / self.step()).round();
        (i.max(0.0) as usize).min(self.theta_grid.len() - 1)
    }
}

pub fn normalized_pattern(
    solution: &ModalSolution,
    scenario: &ScatterScenario,
    grid_size: usize,
) -> Result<FarFieldPattern> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be at least {MIN_GRID_SIZE}, got {grid_size}"
        )));
    }
    let terms = reflected_terms(solution, scenario);
    let step = PI / (grid_size - 1) as f64;
    let theta_grid: Vec<f64> = (0..grid_size)
        .map(|i| if i + 1 == grid_size { PI / 2.0 } else { -PI / 2.0 + i as f64 * step })
        .collect();
    let factor: Vec<Complex64> = theta_grid
        .par_iter()
        .map(|&t| factor_at(scenario, &terms, t))
        .collect();
    let prefactor = radiation_prefactor(scenario.wavenumber(), 1.0, scenario.area(), scenario.eta0());
    let power: Vec<f64> = factor.iter().map(|f| prefactor * f.norm_sqr()).collect();

    let (peak_index, max) = factor
        .iter()
        .map(Complex64::norm_sqr)
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let normalized = factor
        .iter()
        .enumerate()
        .map(|(i, f)| match (i == peak_index, max > 0.0) {
            (true, true) => 1.0,
            (false, true) => f.norm_sqr() / max,
            _ => 0.0,
        })
        .collect();

    Ok(FarFieldPattern {
        peak_angle: theta_grid[peak_index],
        theta_grid,
        factor,
        power,
        normalized,
        peak_index,
        sinc_argument: SincArgument::Literal,
    })
}

pub const FAR_FIELD_MARGIN: f64 = 10.0;

/// Margin ratios for `r >> lambda`, `r >> L` and `L^2 / r << lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldValidity {
    pub valid: bool,
    /// `r / lambda`.
    pub wavelength_ratio: f64,
    /// `r / L`.
    pub size_ratio: f64,
    /// `lambda r / L^2`.
    pub fraunhofer_ratio: f64,
    /// `L = max(2 L_x, 2 L_y)`.
    pub aperture: f64,
}

pub fn far_field_validity(scenario: &ScatterScenario, r: f64) -> Result<FarFieldValidity> {
    validity_for(scenario.wavelength(), 2.0 * scenario.aperture_half_x().max(scenario.aperture_half_y()), r)
}

fn validity_for(wavelength: f64, aperture: f64, r: f64) -> Result<FarFieldValidity> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be positive, got {r}")));
    }
    let wavelength_ratio = r / wavelength;
    let size_ratio = r / aperture;
    let fraunhofer_ratio = wavelength * r / (aperture * aperture);
    Ok(FarFieldValidity {
        valid: [wavelength_ratio, size_ratio, fraunhofer_ratio]
            .iter()
            .all(|&m| m >= FAR_FIELD_MARGIN),
        wavelength_ratio,
        size_ratio,
        fraunhofer_ratio,
        aperture,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_matching::solve;
    use crate::profile::{constant, z3_global_optimal};

    fn default_scenario() -> ScatterScenario {
        ScatterScenario::from_angles(28e9, 0.0, 70f64.to_radians(), 30, 5.0).unwrap()
    }

    fn pec(s: &ScatterScenario) -> ModalSolution {
        solve(&constant(s.period(), Complex64::new(0.0, 0.0)).unwrap(), s).unwrap()
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        for x in [1e-6, 5e-5, 9.99e-5, 1e-4, 0.3, -2.0, 40.0] {
            let direct = f64::sin(x) / x;
            assert!((sinc(x) - direct).abs() < 1e-15, "{x}");
            assert_eq!(sinc(x), sinc(-x));
        }
        assert!(sinc(PI).abs() < 1e-16);
    }

    #[test]
    fn incident_term_vanishes_at_normal_specular() {
        let s = default_scenario();
        // PEC: F(0) = 0 + (-1)(1 + 1) sinc(0)
        let f = pattern_factor(&pec(&s), &s, 0.0);
        assert!((f - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steered_order_dominates_at_design_angle() {
        let s = default_scenario();
        let sol = solve(&z3_global_optimal(&s).unwrap(), &s).unwrap();
        let t = 70f64.to_radians();
        let b1 = sol.amplitude(1).unwrap();
        let main = b1 * (2.0 * t.cos());
        let f = pattern_factor(&sol, &s, t);
        assert!((f - main).norm() < 0.05 * main.norm(), "{f} vs {main}");

        // direct evaluation of the same sum
        let kly = s.wavenumber() * 2.5 * s.period();
        let mut expected = Complex64::new((t.cos() - 1.0) * (kly * t.sin()).sin() / (kly * t.sin()), 0.0);
        for n in [-1, 0, 1] {
            let sn = n as f64 * t.sin();
            let cn = (1.0 - sn * sn).sqrt();
            let x = kly * (t.sin() - sn);
            let sc = if x == 0.0 { 1.0 } else { x.sin() / x };
            expected += sol.amplitude(n).unwrap() * ((t.cos() + cn) * sc);
        }
        assert!((f - expected).norm() < 1e-12);
    }

    #[test]
    fn power_scaling() {
        let s = default_scenario();
        let sol = pec(&s);
        let t = 0.2;
        let p1 = radiated_power(&sol, &s, 1.0, t);
        let p2 = radiated_power(&sol, &s, 2.0, t);
        assert!((p2 / p1 - 4.0).abs() < 1e-12);

        let k = s.wavenumber();
        let eta = s.eta0();
        let a = radiation_prefactor(k, 1.0, 3.0, eta);
        let b = radiation_prefactor(k, 1.0, 12.0, eta);
        assert!((b / a - 16.0).abs() < 1e-12);
        let expected = k * k * 9.0 / (32.0 * PI * PI * eta);
        assert!((a - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn zero_factor_radiates_nothing() {
        // PEC at normal incidence: both surviving terms share the sinc null
        let s = default_scenario();
        let sol = pec(&s);
        let kly = s.wavenumber() * s.aperture_half_y();
        let theta = (PI / kly).asin();
        assert!(radiated_power(&sol, &s, 1.0, theta) < 1e-25);
    }

    #[test]
    fn pec_pattern_is_specular_and_symmetric() {
        let s = default_scenario();
        let p = normalized_pattern(&pec(&s), &s, DEFAULT_GRID_SIZE).unwrap();
        assert!(p.peak_angle.abs() <= p.step());
        for i in 0..p.theta_grid.len() {
            let j = p.theta_grid.len() - 1 - i;
            assert!((p.factor[i].norm() - p.factor[j].norm()).abs() < 1e-10);
        }

        let oblique = ScatterScenario::from_angles(28e9, 20f64.to_radians(), 60f64.to_radians(), 10, 5.0).unwrap();
        let p = normalized_pattern(&pec(&oblique), &oblique, DEFAULT_GRID_SIZE).unwrap();
        assert!((p.peak_angle - 20f64.to_radians()).abs() <= p.step());
    }

    #[test]
    fn normalization_and_grid() {
        let s = default_scenario();
        let sol = solve(&z3_global_optimal(&s).unwrap(), &s).unwrap();
        let p = normalized_pattern(&sol, &s, 1801).unwrap();
        assert_eq!(p.theta_grid.len(), 1801);
        assert_eq!(p.theta_grid[0], -PI / 2.0);
        assert_eq!(p.theta_grid[1800], PI / 2.0);
        assert!((p.theta_grid[900]).abs() < 1e-15);
        assert_eq!(p.normalized[p.peak_index], 1.0);
        assert!(p.normalized.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(p.power.iter().all(|&v| v >= 0.0));
        assert_eq!(p.index_of(p.peak_angle), p.peak_index);
        assert_eq!(p.sinc_argument, SincArgument::Literal);
        assert!(normalized_pattern(&sol, &s, 180).is_err());
        assert!(normalized_pattern(&sol, &s, 181).is_ok());
    }

    #[test]
    fn peak_is_stable_under_refinement() {
        let s = default_scenario();
        let sol = solve(&z3_global_optimal(&s).unwrap(), &s).unwrap();
        let coarse = normalized_pattern(&sol, &s, 451).unwrap();
        let fine = normalized_pattern(&sol, &s, 1801).unwrap();
        assert!((coarse.peak_angle - fine.peak_angle).abs() < coarse.step());
    }

    #[test]
    fn db_floor() {
        let s = default_scenario();
        let p = normalized_pattern(&pec(&s), &s, 181).unwrap();
        let db = p.normalized_db(-120.0);
        assert_eq!(db[p.peak_index], 0.0);
        assert!(db.iter().all(|v| (-120.0..=0.0).contains(v)));
    }

    #[test]
    fn validity_margins() {
        let lam = 0.01;
        let l = 10.0 * lam;
        assert!(validity_for(lam, l, 1e6 * lam).unwrap().valid);
        assert!(!validity_for(lam, l, l).unwrap().valid);
        let fraunhofer = validity_for(lam, l, l * l / lam).unwrap();
        assert!(!fraunhofer.valid);
        assert!((fraunhofer.fraunhofer_ratio - 1.0).abs() < 1e-12);
        assert!(validity_for(lam, l, 0.0).is_err());
        assert!(validity_for(lam, l, f64::NAN).is_err());

        let s = default_scenario();
        let v = far_field_validity(&s, 100.0).unwrap();
        assert!((v.aperture - 5.0 * s.period()).abs() < 1e-15);
        assert!(v.valid);
    }
}
