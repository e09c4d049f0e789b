use thiserror::Error;

/// Errors raised while building, binding or running a query.
///
/// Query denial is not an error: mechanisms report it through
/// [`crate::engine::Outcome::Denied`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown atomic query `{0}`")]
    UnknownAtomic(String),

    #[error("duplicate atomic query `{0}`")]
    DuplicateAtomic(String),

    #[error("query references {0} distinct atomics; at most 16 are supported")]
    TooManyAtomics(usize),

    #[error("missing truth assignment for `{0}`")]
    MissingAssignment(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("row {row}: cannot parse `{value}` in column `{column}` as {expected}")]
    TypeConversion {
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    Arity { row: usize, expected: usize, found: usize },

    #[error("predicate domain is empty")]
    EmptyDomain,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid atomic query `{id}`: {message}")]
    InvalidAtomic { id: String, message: String },

    #[error("numeric oracle did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("min-entropy box is empty (lower bounds sum to {0})")]
    InfeasibleEntropyBox(f64),

    #[error("query is not a flat operator sequence: {0}")]
    NotFlat(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
