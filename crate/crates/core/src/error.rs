use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("aliasing: {samples} samples cannot resolve truncation order {order} (need at least {needed})")]
    Aliasing {
        samples: usize,
        order: usize,
        needed: usize,
    },
    #[error("singular point: t = {t} is outside the open interval (0, {horizon})")]
    SingularPoint { t: f64, horizon: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate family member {index}: right-hand side vanishes")]
    DegenerateMember { index: usize },
    #[error("empty family")]
    EmptyFamily,
    #[error("non-observable truncation: minimum Gramian eigenvalue {eig_min:e}")]
    NonObservable { eig_min: f64 },
    #[error("insufficient time resolution: {0}")]
    TimeResolution(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
