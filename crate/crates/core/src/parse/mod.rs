//! Expression text and the sectioned problem-file format.

mod expression;
mod lexer;
mod problem;

use alloc::string::String;
use core::fmt;

pub use problem::{parse_problem, Claim, Parameter, ProblemKind, ProblemSpec, TIME};

use crate::expr::Expr;

/// Syntax error with a 1-based location inside the input text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The offending token, empty at end of input.
    pub token: String,
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl core::error::Error for SourceError {}

/// A well-formed problem file that violates a structural rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl core::error::Error for ValidationError {}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Source(#[from] SourceError),
    #[error("invalid problem: {0}")]
    Validation(#[from] ValidationError),
}

/// Parses one expression into canonical form.
pub fn parse_expression(text: &str) -> Result<Expr, SourceError> {
    expression::parse_at(text, expression::Origin { line: 1, column: 1 })
}
