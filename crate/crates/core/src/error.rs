use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty measure: total mass must be positive")]
    EmptyMeasure,

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("weight {index} is not strictly positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("oracle limit: {n} points exceeds the enumeration limit of {max}")]
    OracleLimit { n: usize, max: usize },

    #[error("particle count must be at least 1")]
    NoParticles,

    #[error("invalid transport: particles {index} and {next} violate the congestion bound (ratio {ratio})")]
    InvalidTransport {
        index: usize,
        next: usize,
        ratio: f64,
    },

    #[error(
        "constraint violation: initial density {rho} exceeds maximal density {rho_star} at x = {x}"
    )]
    ConstraintViolation { x: f64, rho: f64, rho_star: f64 },

    #[error("force evaluation returned {value} at t = {t}, particle {index} (x = {x})")]
    NonFiniteForce {
        t: f64,
        index: usize,
        x: f64,
        value: f64,
    },

    #[error(
        "picard iteration did not converge after {iterations} sweeps (last residual {residual:e})"
    )]
    PicardDiverged { iterations: usize, residual: f64 },

    #[error("invalid stepper configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
