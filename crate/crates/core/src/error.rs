use thiserror::Error;

use crate::compiler::CompileError;
use crate::frontend::{Position, SyntaxError};
use crate::value::ValueError;

/// Failure raised by a host function or formatter.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct HostError(pub String);

impl HostError {
    pub fn new(msg: impl Into<String>) -> Self {
        HostError(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`this` used outside of a query")]
    ThisOutsideQuery,
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error("host function `{function}` failed: {message}")]
    Host { function: String, message: String },
    #[error("unknown response format `{0}`")]
    UnknownFormatter(String),
    #[error("formatter `{name}` failed: {message}")]
    Formatter { name: String, message: String },
    #[error("node budget exceeded: more than {budget} expansions")]
    BudgetExceeded { budget: u64 },
    #[error("in row {row}: {source}")]
    InRow { row: usize, source: Box<EvalError> },
    #[error("at depth {depth}: {source}")]
    AtDepth { depth: usize, source: Box<EvalError> },
}

impl EvalError {
    /// The innermost error, with row/depth context stripped.
    pub fn root(&self) -> &EvalError {
        match self {
            EvalError::InRow { source, .. } | EvalError::AtDepth { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn in_row(self, row: usize) -> Self {
        EvalError::InRow {
            row,
            source: Box::new(self),
        }
    }

    pub fn at_depth(self, depth: usize) -> Self {
        EvalError::AtDepth {
            depth,
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("statement {statement} ({position}): {source}")]
pub struct RuntimeError {
    /// Zero-based index of the failing statement.
    pub statement: usize,
    pub position: Position,
    pub source: EvalError,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("compile error: {0}")]
    Compile(#[from] CompileError),
    #[error("runtime error at {0}")]
    Runtime(#[from] RuntimeError),
    #[error("invalid function name `{0}`")]
    InvalidName(String),
    #[error("the last statement is not a MEMORIZE query")]
    NotMemorize,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
