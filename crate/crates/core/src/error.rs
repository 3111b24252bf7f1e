use thiserror::Error;

/// Errors raised by set-system construction, certificates and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: index out of range, mismatched universes, wrong dimension.
    #[error("structural error: {0}")]
    Structural(String),

    /// Input outside the domain of the operation (point outside the body, zero step, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A desk-scale guard refused the instance.
    #[error("resource guard: {what} needs {count}, limit is {limit}")]
    Resource { what: &'static str, count: u128, limit: u128 },

    /// Violated precondition of an algorithm (e.g. a column norm above one).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A certificate construction produced a product that does not match its target.
    #[error("construction error: {0}")]
    Construction(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
