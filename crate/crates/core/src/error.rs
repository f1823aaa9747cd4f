use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no crossing at t = {0}")]
    NoCrossing(f64),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),
    #[error("equilibria are not hyperbolic: lambda_1(R) = {0} <= -1/8")]
    NonHyperbolic(f64),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("brake symmetry: {0}")]
    BrakeSymmetry(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Coarse error classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Convergence,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Stiffness { .. } | Error::Convergence(_) => ErrorClass::Convergence,
            Error::Internal(_) => ErrorClass::Internal,
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
