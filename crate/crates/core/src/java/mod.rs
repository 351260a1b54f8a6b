//! Java front end: tokenizer, syntax tree and parser.

mod ast;
mod lexer;
mod parser;

use std::path::Path;

use thiserror::Error;

pub use ast::{Ast, AstNode, NodeId, NodeKind, Role};
pub use lexer::{is_keyword, lex, Token, TokenKind, KEYWORDS};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{line}:{column}: {message}")]
    Lex { line: u32, column: u32, message: String },
    #[error("{line}:{column}: expected {expected}, found `{found}`")]
    Parse { line: u32, column: u32, expected: String, found: String },
    #[error("source is not valid UTF-8 (byte {offset})")]
    Encoding { offset: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Lexes and parses one source text.
pub fn parse_source(source: &str, source_path: &str) -> Result<Ast, FrontendError> {
    let tokens = lex(source)?;
    parse(&tokens, source_path)
}

/// Like [`parse_source`] but accepts arbitrary bytes.
pub fn parse_bytes(bytes: &[u8], source_path: &str) -> Result<Ast, FrontendError> {
    let source = std::str::from_utf8(bytes).map_err(|e| FrontendError::Encoding { offset: e.valid_up_to() })?;
    parse_source(source, source_path)
}

pub fn parse_file(path: &Path) -> Result<Ast, FrontendError> {
    let bytes = std::fs::read(path)
        .map_err(|e| FrontendError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_bytes(&bytes, &path.display().to_string())
}
