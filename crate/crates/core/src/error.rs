use thiserror::Error;

/// Errors produced by the solvers and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("point {point} is not contained in any ball")]
    Coverage { point: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("invariant violated: {0}")]
    Assertion(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand used by the runtime invariant checks.
pub(crate) fn assertion(msg: impl Into<String>) -> Error {
    Error::Assertion(msg.into())
}
