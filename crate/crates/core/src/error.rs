use thiserror::Error;

use crate::spectral_basis::Frequency;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("frequency {0} has {1} zero components; at most one is allowed")]
    DegenerateFrequency(Frequency, usize),

    #[error("branch index {j} is not valid for frequency {k}")]
    InvalidBranch { k: Frequency, j: u8 },

    #[error("singular change of basis at frequency {0}: the amplitude basis is not independent")]
    SingularBasis(Frequency),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state diverged at t = {time}: non-finite coefficient")]
    BlowUp { time: f64 },

    #[error("unknown mode {0} for this system")]
    UnknownMode(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
