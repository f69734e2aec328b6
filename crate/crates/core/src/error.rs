use thiserror::Error;

/// Errors raised anywhere in the synthesis pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column} (offset {offset}): {message}")]
    Syntax {
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("missing assignment for variable `{0}`")]
    MissingAssignment(String),
    #[error("sentence expected, but `{0}` occurs free")]
    FreeVariable(String),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("arity {0} is not supported here")]
    UnsupportedArity(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("operation requires {expected} acceptance")]
    WrongAcceptance { expected: &'static str },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("fixpoint did not stabilise within {cap} iterations: {diagnostic}")]
    IterationCap { cap: usize, diagnostic: String },
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("recomposition mismatch for edge {from} -> {to}")]
    Recomposition { from: String, to: String },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("malformed artifact: {0}")]
    Artifact(String),
    #[error("interrupted before deepening round {next_round}")]
    Interrupted { next_round: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
