use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Source position attached to expression nodes that can fail at run time.
///
/// Positions never take part in equality or ordering: two expressions that
/// differ only in where they were written compare equal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub const fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }

    pub fn is_known(&self) -> bool {
        self.line != 0
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

impl PartialOrd for Loc {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Loc {
    fn cmp(&self, _: &Self) -> core::cmp::Ordering {
        core::cmp::Ordering::Equal
    }
}

impl core::hash::Hash for Loc {
    fn hash<H: core::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_known() {
            write!(f, "{}:{}", self.line, self.col)
        } else {
            f.write_str("<generated>")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero at {0}")]
    DivisionByZero(Loc),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("unresolved name {0} (expression was not elaborated)")]
    Unresolved(String),
    #[error("no companion value recorded for {0}")]
    NoCompanion(String),
    #[error("run-time type mismatch: {0}")]
    Mismatch(String),
    #[error("non-exhaustive case: no branch for {0}")]
    NoBranch(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("domain {0} is infinite and cannot be enumerated")]
    Infinite(String),
    #[error("invalid domain: {0}")]
    Invalid(String),
}

/// A violation of a term's typing or index constraints, located by the path
/// of argument positions from the root.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("ill-formed term at {}: {reason}", fmt_path(.path))]
pub struct TermError {
    pub path: Vec<usize>,
    pub reason: String,
}

pub(crate) fn fmt_path(path: &[usize]) -> String {
    let mut s = String::from("root");
    for p in path {
        s.push('.');
        s.push_str(&alloc::format!("{p}"));
    }
    s
}

impl TermError {
    pub(crate) fn at(path: &[usize], reason: impl Into<String>) -> Self {
        TermError {
            path: path.to_vec(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("clause mismatch: {0}")]
    ClauseMismatch(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("clause for {0} is not in decision-tree normal form: {1}")]
    NotNormalForm(String, String),
    #[error("unknown constructor {0}")]
    UnknownConstructor(String),
    #[error("cannot enumerate {what}: domain {domain} is infinite")]
    InfiniteField { what: String, domain: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
