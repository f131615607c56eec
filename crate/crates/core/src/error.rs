use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole of the gamma function at z = {re} + {im}i")]
    GammaPole { re: f64, im: f64 },

    #[error("pole at s = 1")]
    ZetaPole,

    #[error("pole of the Mellin transform at w = 0")]
    MellinPole,

    #[error("adaptive quadrature did not reach tolerance {tol:e} within {panels} panels (estimate {estimate:e})")]
    Quadrature { tol: f64, panels: usize, estimate: f64 },

    #[error("form {label}: |lambda({p})| = {value} exceeds the Hecke norm {bound}")]
    BoundViolation { label: String, p: u64, value: f64, bound: f64 },

    #[error("coefficient index {n} needs prime {p}, beyond the stored cap {cap}")]
    CoefficientCap { n: u64, p: u64, cap: u64 },

    #[error("Re s = {re} is outside the half-plane Re s > 1/2 where the Euler factor logarithms are principal")]
    HalfPlane { re: f64 },

    #[error("index budget exceeded: {what}")]
    Budget { what: String },

    #[error("contour abscissa {c} is not to the right of the pole at Re w = {pole}")]
    ContourPole { c: f64, pole: f64 },

    #[error("tail series diverges: 4 q^-(1/2+theta) = {ratio} >= 1 at the first prime q = {q} beyond Z = {z}")]
    Divergence { z: u64, q: u64, ratio: f64 },

    #[error("no assigned value for prime {p}")]
    MissingCoordinate { p: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation failed for {label}: {reason}")]
    Validation { label: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("network failure: {0}")]
    Network(String),

    #[error("upstream schema drift: {0}")]
    SchemaDrift(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn validation(label: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { label: label.into(), reason: reason.into() }
    }
}
