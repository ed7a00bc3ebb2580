use core::fmt;

use crate::problem::Hypothesis;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidDomain(&'static str),
    Capacity { requested: usize, cap: usize },
    BasisMismatch,
    LengthMismatch { expected: usize, found: usize },
    InvalidExponents(&'static str),
    NonIntegrableWeight { gamma: f64, dimension: usize },
    OutOfRange { name: &'static str, value: f64 },
    /// A framework was asked to run outside the hypothesis it needs.
    Hypothesis { framework: &'static str, hypothesis: Hypothesis, detail: &'static str },
    InnerSolver { iterations: usize, residual: f64 },
    NoAscentDirection,
    RayWindow { t: f64 },
    NotConverged { framework: &'static str, iterations: usize, residual: f64 },
    Shooting(&'static str),
    NegativeInput { min: f64 },
    ZeroField,
    Unconverged,
    InsufficientResults { found: usize },
    MismatchedProblems,
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDomain(why) => write!(f, "invalid domain: {why}"),
            Error::Capacity { requested, cap } => {
                write!(f, "requested {requested} modes, capacity is {cap}")
            }
            Error::BasisMismatch => write!(f, "fields live on different bases"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::InvalidExponents(why) => write!(f, "invalid exponents: {why}"),
            Error::NonIntegrableWeight { gamma, dimension } => write!(
                f,
                "weight |x|^{gamma} is not integrable in dimension {dimension}"
            ),
            Error::OutOfRange { name, value } => write!(f, "{name} = {value} is out of range"),
            Error::Hypothesis { framework, hypothesis, detail } => write!(
                f,
                "{framework} refused: hypothesis {hypothesis} fails ({detail})"
            ),
            Error::InnerSolver { iterations, residual } => write!(
                f,
                "inner maximisation failed after {iterations} iterations (residual {residual:e})"
            ),
            Error::NoAscentDirection => {
                write!(f, "no direction with positive coupling term was found")
            }
            Error::RayWindow { t } => {
                write!(f, "ray maximum not attained inside the search window (t = {t:e})")
            }
            Error::NotConverged { framework, iterations, residual } => write!(
                f,
                "{framework} did not converge in {iterations} iterations (residual {residual:e})"
            ),
            Error::Shooting(why) => write!(f, "shooting oracle failed: {why}"),
            Error::NegativeInput { min } => write!(f, "input must be nonnegative (min {min:e})"),
            Error::ZeroField => write!(f, "field is identically zero"),
            Error::Unconverged => write!(f, "result is not converged"),
            Error::InsufficientResults { found } => {
                write!(f, "need at least two results, got {found}")
            }
            Error::MismatchedProblems => write!(f, "results describe different problems"),
            Error::Unsupported(why) => write!(f, "unsupported: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
