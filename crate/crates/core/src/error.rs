use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("angle {degrees:.6} deg is outside the open interval (-90, 90) deg")]
    InvalidAngle { degrees: f64 },

    #[error("degenerate geometry: sin(theta_i) == sin(theta_r), the period diverges")]
    DegenerateGeometry,

    #[error("scenario was built from a period and has no design reflection angle")]
    NoDesignAngle,

    #[error("profile evaluated at a pole, y = {y:e} m")]
    EvaluationAtPole { y: f64 },

    #[error("singular profile: denominator vanishes near y = {y:e} m (|den| = {magnitude:e})")]
    SingularProfile { y: f64, magnitude: f64 },

    #[error("malformed impedance table: {0}")]
    MalformedTable(String),

    #[error("non-finite profile sample at y = {y:e} m")]
    NonFiniteSample { y: f64 },

    #[error("missing Fourier coefficient z_{p}")]
    MissingCoefficient { p: i64 },

    #[error("singular system: condition estimate {condition:e}")]
    SingularSystem { condition: f64 },

    #[error("rank-deficient collocation system (min/max |R_ii| = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("profile period {profile:e} m does not match scenario period {scenario:e} m")]
    GeometryMismatch { profile: f64, scenario: f64 },

    #[error("analytic cotangent series disagrees with the numeric DFT by {deviation:e} ohm")]
    AnalyticMismatch { deviation: f64 },
}

impl Error {
    /// Stable machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::InvalidAngle { .. } => "InvalidAngle",
            Error::DegenerateGeometry => "DegenerateGeometry",
            Error::NoDesignAngle => "NoDesignAngle",
            Error::EvaluationAtPole { .. } => "EvaluationAtPole",
            Error::SingularProfile { .. } => "SingularProfile",
            Error::MalformedTable(_) => "MalformedTable",
            Error::NonFiniteSample { .. } => "NonFiniteSample",
            Error::MissingCoefficient { .. } => "MissingCoefficient",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::GeometryMismatch { .. } => "GeometryMismatch",
            Error::AnalyticMismatch { .. } => "AnalyticMismatch",
        }
    }
}
