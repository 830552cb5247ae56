use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested exact method would be too expensive and was refused.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A result failed its own minimality or consistency certificate.
    #[error("certificate violated: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
