//! Floquet mode-matching analysis of periodic impedance-sheet reflectors.
//!
//! A plane wave at `theta_i` hits an impedance sheet `E_t = -Z_s(y) H_t` of
//! period `D`; the reflected field is expanded in Floquet harmonics and the
//! amplitudes follow from a truncated Toeplitz system.

pub mod constants;
pub mod error;
pub mod far_field;
pub mod geometry;
pub mod mode_matching;
pub mod power;
pub mod profile;
pub mod verification;

pub use error::{Error, Result};
pub use geometry::{FloquetHarmonic, ModeClass, ScatterScenario};
pub use mode_matching::{solve, solve_with, ModalSolution, SolverOptions};
pub use profile::{ImpedanceProfile, ProfileKind};
