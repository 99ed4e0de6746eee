use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-physical state: {0}")]
    NonPhysicalState(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },
    #[error("argument outside the domain of definition: {0}")]
    DomainError(String),
    #[error("operator is not positive definite (p^T A p = {0:e})")]
    IndefiniteOperator(f64),
    #[error("reference norm is zero")]
    ZeroNorm,
    #[error("indicator {0} is not available for this equation of state")]
    UnsupportedIndicator(String),
    #[error("vacuum is generated by the Riemann data")]
    VacuumFormation,
    #[error("time step violates the CFL bound (CFL {cfl:.3} > {limit:.3})")]
    CflViolation { cfl: f64, limit: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("step {step} (t = {time}) failed: {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
