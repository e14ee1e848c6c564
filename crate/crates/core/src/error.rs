use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dyadic precision exhausted: need {needed} digits, have {available}")]
    PrecisionExhausted { needed: usize, available: usize },

    #[error("invalid dyadic literal {0:?}")]
    InvalidDyadic(String),

    #[error("lambda = {lambda} is outside the supported regime ({reason})")]
    Regime { lambda: f64, reason: &'static str },

    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),

    #[error("point {x} has no real preimages under T (needs x >= -lambda = {min})")]
    Domain { x: f64, min: f64 },

    #[error("singular weight: a preimage sits at the critical point (x = {x})")]
    SingularWeight { x: f64 },

    #[error("coefficient table corrupted at n = {index}: {relation}")]
    TableCorrupted { index: usize, relation: String },

    #[error("index {index} outside coefficient table of {len} rows")]
    TableRange { index: usize, len: usize },

    #[error("spectral parameter {z} is too close to the spectrum (|Im z| < {eta_min})")]
    NearSpectrum { z: String, eta_min: f64 },

    #[error("measure not normalized: total mass {mass}")]
    NotNormalized { mass: f64 },

    #[error("eigensolver did not converge after {iterations} sweeps")]
    EigenFailure { iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
