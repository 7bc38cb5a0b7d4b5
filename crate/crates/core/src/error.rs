//! Error type shared by all modules.

/// Crate-wide error enumeration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatches, out-of-range
    /// indices, violated construction contracts).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A fixed-step integration drifted outside its accuracy contract,
    /// typically because the step size is too large.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// A stochastic trajectory became numerically unusable (state trace
    /// collapsed).
    #[error("trajectory failure: {0}")]
    TrajectoryFailure(String),

    /// Hamiltonian angle requested for a zero operator.
    #[error("undefined angle: {0}")]
    UndefinedAngle(String),

    /// An operation was called with the wrong objective kind (e.g. a
    /// state-transfer query on a gate-synthesis problem).
    #[error("wrong objective: {0}")]
    WrongObjective(String),

    /// The state is not an eigenvector of every stabilizer, so no definite
    /// syndrome exists.
    #[error("indeterminate syndrome: {0}")]
    IndeterminateSyndrome(String),

    /// Syndrome has no entry in the single-error lookup table; the error is
    /// beyond the code's correction capability.
    #[error("uncorrectable: {0}")]
    Uncorrectable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
