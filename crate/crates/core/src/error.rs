use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("invalid argument: {0}")]
    Arg(String),
    #[error("invalid distribution: {0}")]
    Dist(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("eigensolver did not converge on a {0}x{0} matrix")]
    Convergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
