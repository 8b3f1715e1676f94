use std::fmt;

use thiserror::Error;

use crate::expr::Expr;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Line/column position in a model document (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Unknown block, spare misuse, or an otherwise ill-formed model.
    #[error("model error: {0}")]
    Model(String),

    /// Index-set invariants (nonempty, finite, disjoint) violated.
    #[error("structure error: {0}")]
    Structure(String),

    /// Argument outside the operation's domain (negative time, bad rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {message} (achieved error estimate {estimate:e})")]
    Numeric { message: String, estimate: f64 },

    #[error(
        "independence violation: block `{0}` occurs more than once; \
         use simulate for non-read-once models"
    )]
    IndependenceViolation(String),

    #[error("unsupported composition: {0}; use simulate for this model")]
    UnsupportedComposition(String),

    #[error("sampling error in block `{block}`: {message}")]
    Sampling { block: String, message: String },

    #[error("rewriting did not converge within {steps} steps")]
    NonConvergence { steps: usize, partial: Box<Expr> },

    #[error("{position}: syntax error: {message}")]
    Syntax { position: Position, message: String },

    #[error("{position}: {message}")]
    Semantic { position: Position, message: String },
}

impl Error {
    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
