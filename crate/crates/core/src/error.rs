use thiserror::Error;

/// Errors produced by the model setup and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive input: {0}")]
    NonPositiveInput(&'static str),

    #[error("axial coordinate {0} outside [0, 1]")]
    OutOfDomain(f64),

    #[error("non-positive concentration {value} at node {node}")]
    NonPositiveConcentration { node: usize, value: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("non-positive G2 = {0}")]
    NonPositiveG(f64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular linear system at row {0}")]
    Singular(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_no_convergence(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
