use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An N-function returned a non-finite or negative value.
    #[error("evaluation failed at x = {x:?}, xi = {xi}: {value}")]
    Evaluation { x: Vec<f64>, xi: f64, value: f64 },
    /// The grid cannot resolve the requested kernel or dilation.
    #[error("grid too coarse: {0}")]
    Resolution(String),
    /// The requested geometry has no implemented star-shaped decomposition.
    #[error("decomposition not implemented: {0}")]
    Unsupported(String),
    /// An iterative method failed to bracket or converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
