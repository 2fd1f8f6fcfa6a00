use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions do not fit together.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input outside the operation's domain (non-finite entries, degree 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The first n Krylov vectors are numerically dependent. The caller
    /// should draw a different initial vector.
    #[error("Krylov prefix has numerical rank {rank} < {n}; resample the initial vector")]
    DependentPrefix { rank: usize, n: usize },

    /// A basis was too ill-conditioned to invert reliably.
    #[error("ill-conditioned basis: condition estimate {condition:.3e} exceeds {limit:.3e}")]
    Conditioning { condition: f64, limit: f64 },

    /// A certificate or closure check failed.
    #[error("verification failed: {0}")]
    Verification(String),

    /// Random instance generation ran out of retries.
    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
