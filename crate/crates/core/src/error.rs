use thiserror::Error;

use crate::expr::{DomainError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("definition file line {line}: {message}")]
    Definition { line: usize, message: String },

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("`{name}` jumps by {jump:e} at breakpoint {at}")]
    Discontinuous { name: String, at: f64, jump: f64 },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("`{function}` does not claim {missing} required by the {lemma} case")]
    ClaimMismatch {
        function: String,
        missing: String,
        lemma: String,
    },

    /// alpha1(x)/x grows without bound as x -> 0+, so no convex class K
    /// majorant exists on a window containing the origin.
    #[error("no convex class K majorant: alpha1(x)/x keeps growing near 0 ({ratios:?} at x = {points:?})")]
    MajorantUnavailable { points: Vec<f64>, ratios: Vec<f64> },
}

impl Error {
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Definition { .. } | Error::InvalidFunction(_) | Error::Discontinuous { .. })
    }
}
