//! The `.tsp` surface syntax.
//!
//! ```text
//! file     = item*
//! item     = "const" NAME "=" ["-"] INT ";"
//!          | "var" NAME "=" expr ";"
//!          | "assign" KEY ":" NAME "<-" expr ";"
//!          | "pred" KEY ":" cmp ("&&" cmp)* ";"
//!          | "enum" NAME "{" LABEL ("," LABEL)* "}"
//!          | "state" NAME "=" body
//! body     = "end" | side ["+" side]
//! side     = ("!" | "?") "{" branch ("," branch)* "}"
//! branch   = type NAME "(" [type ("," type)*] ")" [attrs] ":" dest [keys]
//! attrs    = "[" ratio [";" keys ";" keys] "]"
//! ratio    = "_" | NUMBER
//! keys     = "[" [KEY ("," KEY)*] "]"
//! dest     = NAME | "<" outcome ":" NAME ("," outcome ":" NAME)* ">"
//! outcome  = "true" | "false" | LABEL
//! type     = "void" | "boolean" | NAME
//! cmp      = expr ("==" | "!=" | "<" | "<=" | ">" | ">=") expr
//! expr     = term (("+" | "-") term)*
//! term     = unary ("*" unary)*
//! unary    = "-" unary | INT | NAME | "(" expr ")"
//! ```
//!
//! `!{...}` lists output branches and `?{...}` input branches; joining both
//! with `+` gives a mixed session. `_` is the empty ratio. Comments run from
//! `//` to the end of the line.

mod lexer;
mod parser;
mod printer;
mod span;

use thiserror::Error;

pub use parser::parse_protocol;
pub use printer::serialize_protocol;
pub use span::{SourceMap, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    RatioRange,
    IntegerRange,
    UndeclaredName,
    ConstAssignment,
    DuplicateState,
    DuplicateAction,
    DuplicateOutcome,
    DuplicateDeclaration,
}

impl ParseErrorKind {
    /// Stable identifier printed by the command line and matched by tests.
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "SYNTAX",
            ParseErrorKind::RatioRange => "RATIO-RANGE",
            ParseErrorKind::IntegerRange => "INTEGER-RANGE",
            ParseErrorKind::UndeclaredName => "UNDECLARED-NAME",
            ParseErrorKind::ConstAssignment => "CONST-ASSIGNMENT",
            ParseErrorKind::DuplicateState => "NO-DUPLICATE-STATE-NAME",
            ParseErrorKind::DuplicateAction => "DUPLICATE-ACTION",
            ParseErrorKind::DuplicateOutcome => "DUPLICATE-OUTCOME",
            ParseErrorKind::DuplicateDeclaration => "DUPLICATE-DECLARATION",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            span,
            message: message.into(),
        }
    }
}
