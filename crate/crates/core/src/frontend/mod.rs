//! Lexing, parsing and canonical printing of scripts.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::*;
pub use lexer::{is_reserved, tokenize, Keyword, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use printer::{pretty_print, print_expr};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn position(&self) -> Position {
        match self {
            SyntaxError::Lex(e) => e.pos,
            SyntaxError::Parse(e) => e.pos,
        }
    }
}

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str) -> Result<Script, SyntaxError> {
    let tokens = tokenize(source)?;
    Ok(parse(&tokens)?)
}
