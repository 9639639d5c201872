use thiserror::Error;

use crate::evolution::EnergyTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at `{pointer}`: {message}")]
    Parse { pointer: String, message: String },

    #[error("structural violation at xi = {xi:?}: {message}")]
    Structural { xi: Vec<f64>, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigenvalue gap {gap:.3e} between branches {p} and {q} at xi = {xi:?} is below the divisor floor")]
    Degenerate { xi: Vec<f64>, p: usize, q: usize, gap: f64 },

    #[error("branch tracking failed at xi = {xi:?}: {message}")]
    Tracking { xi: Vec<f64>, message: String },

    #[error("CFL violation: dt = {dt:.3e} exceeds the first-order limit, try dt <= {suggested:.3e}")]
    Cfl { dt: f64, suggested: f64 },

    #[error("ILL_POSED_SUSPECTED: L2 norm grew by {growth:.3e} at t = {t:.4}")]
    IllPosedSuspected { t: f64, growth: f64, trace: Box<EnergyTrace> },

    #[error("symmetrizer coercivity unattainable after {doublings} gamma doublings (min ratio {min_ratio:.4}); check the eigenvalue-coincidence assumption")]
    Coercivity { doublings: usize, min_ratio: f64 },

    #[error("non-finite values encountered: {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that mean "the mathematics says no", as opposed to bad input.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::Structural { .. }
                | Error::IllPosedSuspected { .. }
                | Error::Coercivity { .. }
                | Error::Degenerate { .. }
                | Error::Tracking { .. }
        )
    }
}
