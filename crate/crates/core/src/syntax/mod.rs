//! The MTS subject language: a small deterministic class-based language whose
//! test files (`.mtt`) exercise production files (`.mts`).

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use lexer::{escape_string, KEYWORDS};
pub use parser::{parse_source, parse_test_case, parse_tests};
pub use printer::{expr_to_string, print_body, print_program, print_suite, print_test, stmt_to_string};

use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NameKind {
    Class,
    Method,
    Field,
    Parameter,
    Test,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Class => "class",
            NameKind::Method => "method",
            NameKind::Field => "field",
            NameKind::Parameter => "parameter",
            NameKind::Test => "test",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("duplicate {kind} name `{name}` at {line}:{col}")]
    DuplicateName { kind: NameKind, name: String, line: u32, col: u32 },
}

impl ParseError {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        ParseError::Syntax { line: span.line, col: span.col, message: message.into() }
    }

    pub(crate) fn duplicate(kind: NameKind, name: &str, span: Span) -> Self {
        ParseError::DuplicateName { kind, name: name.to_string(), line: span.line, col: span.col }
    }
}

/// Parses production source and records `file` for coverage attribution.
pub fn parse_source_file(file: &str, text: &str) -> Result<Program, ParseError> {
    let mut program = parse_source(text)?;
    program.file = file.to_string();
    Ok(program)
}

pub fn parse_tests_file(path: &str, text: &str) -> Result<TestSuite, ParseError> {
    let mut suite = parse_tests(text)?;
    suite.path = path.to_string();
    Ok(suite)
}
