use thiserror::Error;

use crate::ap::Progression;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("base coloring has a monochromatic progression {0}")]
    BaseNotMonoFree(Progression),

    #[error("outside the certified regime: {0}")]
    RegimeRefused(String),

    #[error("sampler failed: {0}")]
    SamplerFailed(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("checksum mismatch: recorded {recorded}, computed {computed}")]
    ChecksumMismatch { recorded: String, computed: String },

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code used by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        use crate::certificate::exit;
        match self {
            Error::Parse { .. } | Error::Io(_) => exit::PARSE_OR_IO,
            Error::ChecksumMismatch { .. } => exit::CHECKSUM_MISMATCH,
            Error::RegimeRefused(_) => exit::REGIME_REFUSED,
            Error::BudgetExhausted(_) | Error::Overflow(_) => exit::BUDGET_OR_GUARD,
            Error::BaseNotMonoFree(_) | Error::SamplerFailed(_) | Error::ReplayMismatch(_) => {
                exit::PROPERTY_FAILED
            }
            Error::InvalidParameter(_) | Error::InvalidColoring(_) | Error::Hypothesis(_) => {
                exit::PARSE_OR_IO
            }
        }
    }
}
