use thiserror::Error;

use num_bigint::BigInt;

/// Errors raised by the library. Each variant belongs to one of four
/// classes that the CLI maps onto distinct exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precision exhausted: {0}")]
    Precision(String),

    #[error("near tie between candidates {tied:?} could not be resolved")]
    NearTie { tied: Vec<BigInt> },

    #[error("point coincides with the endpoint of interval {index}")]
    EndpointHit { index: BigInt },

    #[error("location ambiguous at level {level}")]
    Ambiguous { level: usize },

    #[error("m = {m} is outside the level-{level} range ({lo}, {hi}]")]
    NotInLevel {
        level: usize,
        m: BigInt,
        lo: BigInt,
        hi: BigInt,
    },

    #[error("no admissible index at level {level}")]
    NoAdmissibleIndex { level: usize },

    #[error("hypothesis fails at level {level}: {detail}")]
    HypothesisFail { level: usize, detail: String },

    #[error("rank assumption falsified: M(y) encloses 0 for y = {0:?}")]
    RankSuspect(Vec<BigInt>),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invariant falsified: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_)
            | Error::Parse(_)
            | Error::NotInLevel { .. }
            | Error::NoAdmissibleIndex { .. }
            | Error::HypothesisFail { .. }
            | Error::Io(_) => 2,
            Error::Precision(_)
            | Error::NearTie { .. }
            | Error::EndpointHit { .. }
            | Error::Ambiguous { .. } => 3,
            Error::Budget(_) => 4,
            Error::Invariant(_) | Error::RankSuspect(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // serializing straight to a writer surfaces write failures here too
        if e.is_io() {
            return Error::Io(e.to_string());
        }
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
