use thiserror::Error;

/// Errors produced by the filter, planner, and simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed mesh file. `offset` is the byte position where parsing stopped.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The two correspondences of a pseudo-measurement pair coincide.
    #[error("degenerate correspondence pair")]
    DegeneratePair,

    #[error("planning failure: {0}")]
    Planning(String),

    #[error("simulation failure: {0}")]
    Simulation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
