//! Error type shared by all modules.

use std::fmt;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An evaluation point lies outside the operation's domain.
    Domain(String),
    /// A construction parameter is invalid (nonpositive width, bad sizes, ...).
    Parameter(String),
    /// A method precondition fails for the requested configuration
    /// (e.g. the special quadratic bubble requires `h > 2.6 eps`).
    Validity(String),
    /// A function evaluation produced a non-finite value.
    NonFinite(String),
    /// Zero or denormal pivot encountered at the given elimination index.
    SingularPivot(usize),
    /// The caller broke an operation contract (e.g. nonzero super-diagonal
    /// passed to the forward bidiagonal solve).
    Contract(String),
    /// Adaptive refinement did not converge; carries the last two values.
    ToleranceNotMet {
        context: String,
        last: f64,
        previous: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Validity(msg) => write!(f, "validity error: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite evaluation: {msg}"),
            Error::SingularPivot(i) => write!(f, "singular system: zero or denormal pivot at index {i}"),
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::ToleranceNotMet {
                context,
                last,
                previous,
            } => write!(
                f,
                "tolerance not met in {context}: last two values {previous} and {last}"
            ),
        }
    }
}

impl std::error::Error for Error {}
