use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation (negative time,
    /// evaluation point past the horizon, mismatched grids, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or solver parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The numerical scheme broke down (blow-up, non-positive denominator).
    #[error("solver failure: {0}")]
    Solver(String),

    /// A computed kernel or curve left its a-priori envelope.
    #[error("envelope violation at s = {s}: value {value} outside [0, {bound}]")]
    Envelope { s: f64, value: f64, bound: f64 },

    /// Mesh refinement hit its level cap before meeting the tolerance.
    #[error("refinement stopped at N = {intervals} with successive distance {distance:e} (tolerance {tolerance:e})")]
    NotConverged {
        intervals: usize,
        distance: f64,
        tolerance: f64,
        last: Box<crate::equilibrium::Refinement>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
