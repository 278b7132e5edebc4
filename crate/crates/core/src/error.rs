use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("iteration did not converge: {0}")]
    Convergence(String),
    #[error("no sign change of the shooting discriminant: {0}")]
    Bracket(String),
    #[error("decay fit failed: {0}")]
    Fit(String),
    #[error("mesh cannot resolve the request: {0}")]
    Mesh(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Validation(_) | Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
