//! Fourier coefficients `z_p` of a periodic profile under the convention
//! `Z_s(y) = sum_p z_p exp(-j 2 pi p y / D)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{ImpedanceProfile, ProfileKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    Analytic,
    NumericDft,
}

/// Coefficients `z_p` for `p` in `-P..=P`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierImpedance {
    max_order: usize,
    coefficients: Vec<Complex64>,
    period: f64,
    source_kind: ProfileKind,
    estimation: Estimation,
}

/// `max(4096, 8P)`.
pub fn default_grid_size(max_order: usize) -> usize {
    (8 * max_order).max(4096)
}

impl FourierImpedance {
    /// Builds a coefficient set directly, e.g. for externally computed spectra.
    pub fn from_coefficients(
        period: f64,
        coefficients: Vec<Complex64>,
        source_kind: ProfileKind,
        estimation: Estimation,
    ) -> Result<Self> {
        if coefficients.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("coefficient count must be odd (p = -P..=P)".into()));
        }
        Ok(Self {
            max_order: coefficients.len() / 2,
            coefficients,
            period,
            source_kind,
            estimation,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn source_kind(&self) -> ProfileKind {
        self.source_kind
    }

    pub fn estimation(&self) -> Estimation {
        self.estimation
    }

    pub fn get(&self, p: i64) -> Option<Complex64> {
        let p_max = self.max_order as i64;
        (p.abs() <= p_max).then(|| self.coefficients[(p + p_max) as usize])
    }

    pub fn coefficient(&self, p: i64) -> Result<Complex64> {
        self.get(p).ok_or(Error::MissingCoefficient { p })
    }

    /// `(p, z_p)` in ascending `p`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let p_max = self.max_order as i64;
        self.coefficients.iter().enumerate().map(move |(i, &z)| (i as i64 - p_max, z))
    }

    /// Copy with one coefficient overwritten.
    pub fn with_coefficient(&self, p: i64, z: Complex64) -> Result<Self> {
        let p_max = self.max_order as i64;
        if p.abs() > p_max {
            return Err(Error::MissingCoefficient { p });
        }
        let mut out = self.clone();
        out.coefficients[(p + p_max) as usize] = z;
        Ok(out)
    }

    /// Truncated series `sum_{|p| <= P} z_p exp(-j 2 pi p y / D)`.
    pub fn reconstruct(&self, y: f64) -> Complex64 {
        self.iter()
            .map(|(p, z)| z * crate::geometry::floquet_phase(self.period, p as i32, y))
            .sum()
    }
}

/// Half-step-offset uniform-grid DFT of one period.
///
/// Samples sit at `y_m = (m + 1/2) D / G`, so the cotangent poles at `y = mD`
/// are never touched. Requires `grid_size >= 4P + 2`.
pub fn fourier_coefficients(
    profile: &ImpedanceProfile,
    max_order: usize,
    grid_size: usize,
) -> Result<FourierImpedance> {
    if grid_size < 4 * max_order + 2 {
        return Err(Error::InvalidArgument(format!(
            "grid_size {grid_size} < 4P + 2 = {}",
            4 * max_order + 2
        )));
    }
    let d = profile.period();
    let g = grid_size as f64;
    let mut buffer = (0..grid_size)
        .map(|m| {
            let y = (m as f64 + 0.5) * d / g;
            match profile.eval(y) {
                Ok(z) if z.re.is_finite() && z.im.is_finite() => Ok(z),
                Ok(_) => Err(Error::NonFiniteSample { y }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    FftPlanner::new().plan_fft_forward(grid_size).process(&mut buffer);

    // z_p = (1/G) e^{j pi p / G} X[(-p) mod G]
    let p_max = max_order as i64;
    let coefficients = (-p_max..=p_max)
        .map(|p| {
            let bin = (-p).rem_euclid(grid_size as i64) as usize;
            let shift = Complex64::from_polar(1.0 / g, PI * p as f64 / g);
            buffer[bin] * shift
        })
        .collect();
    Ok(FourierImpedance {
        max_order,
        coefficients,
        period: d,
        source_kind: profile.kind(),
        estimation: Estimation::NumericDft,
    })
}

/// Principal-value series of the cotangent design, `z_0 = 0` and
/// `z_p = Z0 sgn(p) sgn(theta_r - theta_i)`. Only obtainable through
/// [`verify_cotangent_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentSeries {
    signed_reference: f64,
    period: f64,
    max_deviation: f64,
}

/// Acceptance threshold for the analytic cotangent series, relative to `|Z0|`.
pub const COTANGENT_CONSISTENCY: f64 = 1e-6;

/// Checks the analytic cotangent coefficients against the numeric DFT up to
/// order `max_order` and, if they agree within `1e-6 |Z0|`, unlocks them.
pub fn verify_cotangent_series(
    profile: &ImpedanceProfile,
    max_order: usize,
    grid_size: usize,
) -> Result<CotangentSeries> {
    let (Some(z0), Some(order)) = (profile.cotangent_reference(), profile.cotangent_order()) else {
        return Err(Error::InvalidArgument(format!(
            "analytic series exists only for the cotangent profile, not {}",
            profile.kind().as_str()
        )));
    };
    let series = CotangentSeries {
        signed_reference: z0 * order as f64,
        period: profile.period(),
        max_deviation: 0.0,
    };
    let numeric = fourier_coefficients(profile, max_order, grid_size)?;
    let deviation = numeric
        .iter()
        .map(|(p, z)| (z - series.coefficient(p)).norm())
        .fold(0.0, f64::max);
    if deviation >= COTANGENT_CONSISTENCY * z0.abs() {
        return Err(Error::AnalyticMismatch { deviation });
    }
    Ok(CotangentSeries { max_deviation: deviation, ..series })
}

impl CotangentSeries {
    pub fn coefficient(&self, p: i64) -> Complex64 {
        Complex64::new(self.signed_reference * p.signum() as f64, 0.0)
    }

    /// Largest `|z_p^analytic - z_p^numeric|` seen during verification.
    pub fn max_deviation(&self) -> f64 {
        self.max_deviation
    }

    pub fn coefficients(&self, max_order: usize) -> FourierImpedance {
        let p_max = max_order as i64;
        FourierImpedance {
            max_order,
            coefficients: (-p_max..=p_max).map(|p| self.coefficient(p)).collect(),
            period: self.period,
            source_kind: ProfileKind::Cotangent,
            estimation: Estimation::Analytic,
        }
    }
}
