use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received parameters that violate its invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An argument is outside the domain of the operation (non-finite input,
    /// K < 2 where opponents are required, querying an unassigned slot, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A Monte Carlo estimator retained too few samples to return a usable value.
    #[error("insufficient samples: retained {retained} columns, need at least {required}")]
    InsufficientSamples { retained: usize, required: usize },

    /// Rank or index outside the valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Two containers that must agree in shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A caller-supplied CDF carries no mass where the solver needs it.
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    /// Configuration file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
