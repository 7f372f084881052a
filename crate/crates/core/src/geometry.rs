//! Scattering scenario and the Floquet harmonic ladder.
//!
//! The surface lies in the `z = 0` plane and is periodic along `y` with
//! period `D`. A TE (x-polarized) plane wave arrives from elevation
//! `theta_i` in the `yz` plane. Harmonic `n` has tangential wavenumber
//! `k_y,n = k sin(theta_i) + 2 pi n / D`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::constants::{eta0, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Relative tolerance on `|k_y| = k` for grazing classification.
pub const GRAZING_TOLERANCE: f64 = 1e-12;

/// `exp(-j 2 pi n y / D)` with the phase reduced to one period first.
pub fn floquet_phase(period: f64, n: i32, y: f64) -> Complex64 {
    let t = (y / period).rem_euclid(1.0);
    let phase = -2.0 * PI * ((n as f64 * t).rem_euclid(1.0));
    Complex64::from_polar(1.0, phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeClass {
    Propagating,
    Evanescent,
}

impl ModeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Propagating => "propagating",
            ModeClass::Evanescent => "evanescent",
        }
    }
}

/// One Floquet order of the reflected field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetHarmonic {
    pub index: i32,
    /// Tangential wavenumber, rad/m.
    pub k_y: f64,
    /// Longitudinal wavenumber, rad/m. Real and non-negative when
    /// propagating, `+j|.|` when evanescent.
    pub k_z: Complex64,
    pub mode_class: ModeClass,
    /// Reflection angle in radians, present only for propagating orders.
    pub angle: Option<f64>,
    /// TE modal admittance `k_z / (eta0 k)`, siemens.
    pub admittance: Complex64,
    /// `|k_y| = k` within [`GRAZING_TOLERANCE`]; such a mode carries no power.
    pub grazing: bool,
}

impl FloquetHarmonic {
    pub fn is_propagating(&self) -> bool {
        self.mode_class == ModeClass::Propagating
    }

    /// `cos(theta_r,n)`, zero for evanescent orders.
    pub fn cos_angle(&self) -> f64 {
        self.angle.map_or(0.0, f64::cos)
    }
}

/// The global problem definition: frequency, angles, period, truncation and
/// aperture. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterScenario {
    frequency: f64,
    theta_i: f64,
    theta_r: Option<f64>,
    wavelength: f64,
    wavenumber: f64,
    period: f64,
    truncation: usize,
    periods_per_side: f64,
    eta0: f64,
}

fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta.abs() >= FRAC_PI_2 {
        return Err(Error::InvalidAngle { degrees: theta.to_degrees() });
    }
    Ok(())
}

fn check_common(frequency: f64, periods_per_side: f64) -> Result<()> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {frequency}")));
    }
    if !(periods_per_side.is_finite() && periods_per_side > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "periods_per_side must be positive, got {periods_per_side}"
        )));
    }
    Ok(())
}

impl ScatterScenario {
    /// Builds a scenario whose period redirects `theta_i` into `theta_r`:
    /// `D = lambda / |sin(theta_r) - sin(theta_i)|`. The aperture spans
    /// `periods_per_side * D` along each side, so `L_x = L_y = periods_per_side * D / 2`.
    pub fn from_angles(
        frequency: f64,
        theta_i: f64,
        theta_r: f64,
        truncation: usize,
        periods_per_side: f64,
    ) -> Result<Self> {
        check_common(frequency, periods_per_side)?;
        check_angle(theta_i)?;
        check_angle(theta_r)?;
        let delta = theta_r.sin() - theta_i.sin();
        if delta == 0.0 {
            return Err(Error::DegenerateGeometry);
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        let scenario = Self {
            frequency,
            theta_i,
            theta_r: Some(theta_r),
            wavelength,
            wavenumber: 2.0 * PI / wavelength,
            period: wavelength / delta.abs(),
            truncation,
            periods_per_side,
            eta0: eta0(),
        };
        debug_assert!(scenario.psi_matches_design_harmonic());
        Ok(scenario)
    }

    /// Builds a scenario with an explicit period and no design reflection angle.
    pub fn from_period(
        frequency: f64,
        theta_i: f64,
        period: f64,
        truncation: usize,
        periods_per_side: f64,
    ) -> Result<Self> {
        check_common(frequency, periods_per_side)?;
        check_angle(theta_i)?;
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        Ok(Self {
            frequency,
            theta_i,
            theta_r: None,
            wavelength,
            wavenumber: 2.0 * PI / wavelength,
            period,
            truncation,
            periods_per_side,
            eta0: eta0(),
        })
    }

    /// Same geometry with a different truncation order.
    pub fn with_truncation(&self, truncation: usize) -> Self {
        Self { truncation, ..self.clone() }
    }

    /// Re-derives the period for a new design reflection angle.
    pub fn with_theta_r(&self, theta_r: f64) -> Result<Self> {
        Self::from_angles(self.frequency, self.theta_i, theta_r, self.truncation, self.periods_per_side)
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn theta_i(&self) -> f64 {
        self.theta_i
    }

    pub fn theta_r(&self) -> Option<f64> {
        self.theta_r
    }

    pub fn design_theta_r(&self) -> Result<f64> {
        self.theta_r.ok_or(Error::NoDesignAngle)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn periods_per_side(&self) -> f64 {
        self.periods_per_side
    }

    pub fn aperture_half_x(&self) -> f64 {
        0.5 * self.periods_per_side * self.period
    }

    pub fn aperture_half_y(&self) -> f64 {
        0.5 * self.periods_per_side * self.period
    }

    /// `S = 4 L_x L_y`.
    pub fn area(&self) -> f64 {
        4.0 * self.aperture_half_x() * self.aperture_half_y()
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Sign of the grating order steered toward the design angle: `+1` when
    /// `sin(theta_r) > sin(theta_i)`, `-1` otherwise. Period-only scenarios use `+1`.
    pub fn design_order(&self) -> i32 {
        match self.theta_r {
            Some(tr) if tr.sin() < self.theta_i.sin() => -1,
            _ => 1,
        }
    }

    /// `Psi(y) = exp(-j k (sin theta_r - sin theta_i) y)`, evaluated through the
    /// reduced phase so it is exactly `D`-periodic. Equals `Phi_{+-1}(y)`.
    pub fn psi(&self, y: f64) -> Complex64 {
        self.phi(self.design_order(), y)
    }

    /// `Phi_n(y) = exp(-j (k_y,n - k_y) y) = exp(-j 2 pi n y / D)`.
    pub fn phi(&self, n: i32, y: f64) -> Complex64 {
        floquet_phase(self.period, n, y)
    }

    fn psi_matches_design_harmonic(&self) -> bool {
        let Some(tr) = self.theta_r else { return true };
        let y = 0.371 * self.period;
        let direct = Complex64::from_polar(1.0, -self.wavenumber * (tr.sin() - self.theta_i.sin()) * y);
        (direct - self.psi(y)).norm() < 1e-9
    }

    pub fn harmonic(&self, n: i32) -> FloquetHarmonic {
        let k = self.wavenumber;
        let k_y = k * self.theta_i.sin() + 2.0 * PI * n as f64 / self.period;
        let excess = k_y.abs() - k;
        let grazing = excess.abs() <= GRAZING_TOLERANCE * k;
        let (k_z, mode_class, angle) = if grazing {
            (Complex64::new(0.0, 0.0), ModeClass::Propagating, Some(FRAC_PI_2.copysign(k_y)))
        } else if excess < 0.0 {
            let kz = ((k - k_y) * (k + k_y)).sqrt();
            (Complex64::new(kz, 0.0), ModeClass::Propagating, Some((k_y / k).asin()))
        } else {
            let kz = ((k_y - k) * (k_y + k)).sqrt();
            (Complex64::new(0.0, kz), ModeClass::Evanescent, None)
        };
        FloquetHarmonic {
            index: n,
            k_y,
            k_z,
            mode_class,
            angle,
            admittance: k_z / (self.eta0 * k),
            grazing,
        }
    }

    /// Harmonics `-N..=N`.
    pub fn harmonics(&self) -> Vec<FloquetHarmonic> {
        let n = self.truncation as i32;
        (-n..=n).map(|i| self.harmonic(i)).collect()
    }

    /// All propagating orders in ascending order (independent of truncation).
    pub fn propagating_indices(&self) -> Vec<i32> {
        let k = self.wavenumber;
        let scale = self.period / (2.0 * PI);
        let ky0 = k * self.theta_i.sin();
        let lo = ((-k - ky0) * scale).floor() as i32 - 1;
        let hi = ((k - ky0) * scale).ceil() as i32 + 1;
        (lo..=hi).filter(|&n| self.harmonic(n).is_propagating()).collect()
    }

    /// Propagating orders that fall inside the truncation window.
    pub fn retained_propagating_indices(&self) -> Vec<i32> {
        let n = self.truncation as i32;
        self.propagating_indices().into_iter().filter(|i| i.abs() <= n).collect()
    }

    /// `false` when some propagating order lies outside `-N..=N`.
    pub fn truncation_covers_propagating(&self) -> bool {
        let n = self.truncation as i32;
        self.propagating_indices().iter().all(|i| i.abs() <= n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_scenario() -> ScatterScenario {
        ScatterScenario::from_angles(28e9, 0.0, 70f64.to_radians(), 30, 5.0).unwrap()
    }

    #[test]
    fn default_wavelength_and_period() {
        let s = default_scenario();
        // lambda = c / f, D = lambda / sin 70deg
        assert!((s.wavelength() * 1e3 - 10.706_873_5).abs() < 1e-6);
        assert!((s.period() * 1e3 - 11.394_016_79).abs() < 1e-7);
        assert!((s.period() * 1e3 - 11.394).abs() < 5e-4);
        assert!((s.aperture_half_y() - 2.5 * s.period()).abs() < 1e-18);
    }

    #[test]
    fn thirty_degrees_gives_two_wavelengths() {
        let s = ScatterScenario::from_angles(10e9, 0.0, 30f64.to_radians(), 4, 5.0).unwrap();
        assert!((s.period() / s.wavelength() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid_angles() {
        assert_eq!(ScatterScenario::from_angles(28e9, 0.0, 0.0, 3, 5.0), Err(Error::DegenerateGeometry));
        let r = ScatterScenario::from_angles(28e9, 0.0, FRAC_PI_2, 3, 5.0);
        assert!(matches!(r, Err(Error::InvalidAngle { .. })));
        let r = ScatterScenario::from_angles(-1.0, 0.0, 0.5, 3, 5.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fundamental_at_normal_incidence() {
        let s = default_scenario();
        let h = s.harmonic(0);
        assert_eq!(h.k_y, 0.0);
        assert_eq!(h.angle, Some(0.0));
        assert!((h.admittance.re - 1.0 / s.eta0()).abs() < 1e-15);
        assert_eq!(h.admittance.im, 0.0);
    }

    #[test]
    fn first_order_hits_design_angle() {
        let s = default_scenario();
        let h = s.harmonic(1);
        assert!(h.is_propagating());
        assert!((h.angle.unwrap() - 70f64.to_radians()).abs() < 1e-12);
        assert!((h.k_y / s.wavenumber() - 0.939_692_620_785_908_4).abs() < 1e-12);
    }

    #[test]
    fn negative_design_order_hits_design_angle() {
        let s = ScatterScenario::from_angles(28e9, 10f64.to_radians(), -40f64.to_radians(), 5, 5.0).unwrap();
        assert_eq!(s.design_order(), -1);
        let h = s.harmonic(-1);
        assert!((h.angle.unwrap() + 40f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn second_order_is_evanescent() {
        let s = default_scenario();
        let h = s.harmonic(2);
        assert_eq!(h.mode_class, ModeClass::Evanescent);
        assert_eq!(h.k_z.re, 0.0);
        assert!(h.k_z.im > 0.0);
        assert_eq!(h.admittance.re, 0.0);
        assert!(h.angle.is_none());
    }

    #[test]
    fn propagating_sets() {
        assert_eq!(default_scenario().propagating_indices(), vec![-1, 0, 1]);
        let s = ScatterScenario::from_angles(10e9, 0.0, 30f64.to_radians(), 4, 5.0).unwrap();
        assert_eq!(s.propagating_indices(), vec![-2, -1, 0, 1, 2]);
        let lam = SPEED_OF_LIGHT / 10e9;
        let s = ScatterScenario::from_period(10e9, 0.0, 0.45 * lam, 2, 5.0).unwrap();
        assert_eq!(s.propagating_indices(), vec![0]);
    }

    #[test]
    fn grazing_order_is_flagged() {
        // D = 2 lambda: order 2 has sin(theta) = 1.
        let lam = SPEED_OF_LIGHT / 10e9;
        let s = ScatterScenario::from_period(10e9, 0.0, 2.0 * lam, 4, 5.0).unwrap();
        let h = s.harmonic(2);
        assert!(h.grazing);
        assert!(h.is_propagating());
        assert_eq!(h.k_z, Complex64::new(0.0, 0.0));
        assert_eq!(h.admittance, Complex64::new(0.0, 0.0));
        assert!(!s.harmonic(1).grazing);
    }

    #[test]
    fn psi_is_design_harmonic() {
        let s = default_scenario();
        assert!(s.psi_matches_design_harmonic());
        for &y in &[0.0, 0.1, 0.25, 0.77] {
            let y = y * s.period();
            assert!((s.psi(y) - s.phi(1, y)).norm() < 1e-15);
        }
    }

    #[test]
    fn truncation_warning() {
        let s = ScatterScenario::from_angles(10e9, 0.0, 30f64.to_radians(), 1, 5.0).unwrap();
        assert!(!s.truncation_covers_propagating());
        assert_eq!(s.retained_propagating_indices(), vec![-1, 0, 1]);
        assert!(default_scenario().truncation_covers_propagating());
    }
}
