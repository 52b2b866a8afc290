//! Error type shared by all modules of the crate.

use std::fmt;

/// Errors from channel, capacity, and Monte Carlo computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation
    /// (e.g. a nonpositive argument to the exponential integral).
    Domain(String),
    /// The call itself is malformed (mismatched grid sizes, inconsistent
    /// parameters) rather than numerically out of range.
    Usage(String),
    /// A numerical procedure failed to converge or lost accuracy
    /// (quadrature, factorization, root bracketing).
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::Usage(msg) => write!(f, "usage error: {msg}"),
            Self::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
