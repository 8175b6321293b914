use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported quadrature degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("dof index {index} out of range for system of size {size}")]
    DofOutOfRange { index: usize, size: usize },

    #[error("missing history for interval {0}")]
    MissingHistory(usize),

    #[error("Newton iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("time step {interval} failed: {source}")]
    StepFailed {
        interval: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
