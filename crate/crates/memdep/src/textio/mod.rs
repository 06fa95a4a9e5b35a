//! On-disk formats: membrane systems (`.pms`), dependency graphs (`.dg`),
//! plain s-t digraphs, and Graphviz DOT output.
//!
//! Both input formats are line oriented. A line whose first token starts
//! with `@` opens a section; `;` ends a line like a newline does, and `#`
//! at the start of a token starts a comment that runs to the end of the
//! line.

mod dg;
mod dot;
mod lex;
mod pms;

use std::fmt;

pub use dg::{graph_warnings, parse_digraph, parse_graph, serialize_digraph, serialize_graph};
pub use dot::emit_dot;
pub use pms::{parse_system, parse_system_unvalidated, serialize_system, SystemSpans};

use memdep_core::IssueCode;

/// A position in the source text. Line and column are 1-based and count
/// characters; `offset` is the byte offset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl SourceSpan {
    pub fn start() -> Self {
        SourceSpan {
            line: 1,
            column: 1,
            offset: 0,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Syntax,
    UndeclaredNode,
    MissingDistinguished,
    /// A validation error of the parsed system.
    Invalid(IssueCode),
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Syntax => "SYNTAX_ERROR",
            ErrorCode::UndeclaredNode => "UNDECLARED_NODE",
            ErrorCode::MissingDistinguished => "MISSING_DISTINGUISHED",
            ErrorCode::Invalid(code) => code.as_str(),
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocatedError {
    pub code: ErrorCode,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for LocatedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.code, self.message)
    }
}

/// One or more located errors, in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub errors: Vec<LocatedError>,
}

impl ParseError {
    pub(crate) fn single(code: ErrorCode, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            errors: vec![LocatedError {
                code,
                message: message.into(),
                span,
            }],
        }
    }

    pub(crate) fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        Self::single(ErrorCode::Syntax, span, message)
    }

    pub fn first(&self) -> &LocatedError {
        &self.errors[0]
    }

    pub fn has(&self, code: ErrorCode) -> bool {
        self.errors.iter().any(|e| e.code == code)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}
