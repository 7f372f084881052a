//! Physical constants (SI 2019 / CODATA 2018).

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Free-space wave impedance sqrt(mu0/eps0), ohm.
pub fn eta0() -> f64 {
    (MU_0 / EPSILON_0).sqrt()
}
