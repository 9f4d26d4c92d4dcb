//! Surface syntax: `.dtt` theory files, `.fincat` category descriptions, `.scn`
//! scenario bindings, and printers that round-trip with the parsers.

mod dtt;
mod fincat;
mod print;
mod scenario;

use std::fmt;

use thiserror::Error;

pub use dtt::{parse_dtt, Decl, Located, SourceFile};
pub use fincat::{
    parse_fincat, print_fincat, ArrowDecl, CatBlock, CatFile, Composite, FamilyBlock,
    FunctorBlock, NatBlock, SectionBlock,
};
pub use print::{print_decl, print_file, print_term, print_type};
pub use scenario::{parse_scenario, Binding, BindingKind, Scenario};

/// 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lexical(char),
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("`{name}` is a {actual}, expected a {expected}")]
    WrongKind {
        name: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("`{keyword}` takes {expected} argument(s), found {found}")]
    Arity {
        keyword: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
}

/// A diagnostic with its position in the input.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }

    pub(crate) fn syntax(pos: Pos, expected: impl Into<String>, found: impl Into<String>) -> Self {
        ParseError::new(
            pos,
            ParseErrorKind::Syntax {
                expected: expected.into(),
                found: found.into(),
            },
        )
    }
}
