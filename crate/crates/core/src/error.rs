use std::path::PathBuf;

use num_complex::Complex64;

use crate::hodograph::PolarPoint;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index k = {k} must exceed the multiplicity n = {n}")]
    IndexOutOfRange { k: u32, n: u32 },

    #[error("invalid coefficient set: {0}")]
    InvalidCoefficients(String),

    #[error("hodographic radius {r} exceeds the certified radius {limit}")]
    OutsideRegion { r: f64, limit: f64 },

    #[error("derivative requested at the origin of the hodographic plane")]
    AtOrigin,

    #[error("no radius in the calibration scan passed the Jacobian and dominance tests")]
    CalibrationFailed,

    #[error("first-term inversion found no root bracket for angle {0}")]
    NoBracket(f64),

    #[error("Newton inversion stalled after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: PolarPoint,
    },

    #[error("differential of H is near-singular at r = {r}, theta = {theta}")]
    SingularDifferential { r: f64, theta: f64 },

    #[error("finite-difference stencil: {0}")]
    Stencil(String),

    #[error("evaluation failed at z = {z}: {source}")]
    Evaluation {
        z: Complex64,
        #[source]
        source: Box<Error>,
    },

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("energy minimization stopped after {iterations} iterations (gradient norm {grad_norm:e}): {reason}")]
    Minimization {
        iterations: usize,
        grad_norm: f64,
        reason: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(z: Complex64, source: Error) -> Self {
        Error::Evaluation {
            z,
            source: Box::new(source),
        }
    }
}
