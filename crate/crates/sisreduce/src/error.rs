//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A state, assignment or trace does not match the size of the graph it
    /// is used with.
    #[error("size mismatch: expected {expected} nodes, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("graph is not connected")]
    NotConnected,

    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    /// Every assignment attains the optimum, so no optimality gap exists.
    #[error("every assignment is optimal; the gap is undefined")]
    AllOptimal,

    /// Every candidate matrix assigns probability zero to the observations.
    #[error("all candidates have zero likelihood")]
    Degenerate,

    #[error("log-likelihood is not quadratic in the free links: {0}")]
    NotQuadratic(String),

    #[error("no admissible transition sequence exists: {0}")]
    Unreachable(String),

    #[error("invalid gadget indices: {0}")]
    BadIndices(String),

    #[error("penalty fixed point did not stabilise within {0} rounds")]
    FixedPointDiverged(usize),

    #[error("invalid host graph: {0}")]
    InvalidHost(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
