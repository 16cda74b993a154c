use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },

    #[error("unsupported requirement `{tag}` at {pos}")]
    UnsupportedRequirement { tag: String, pos: Pos },

    #[error("unsupported construct at {pos}: {msg}")]
    Unsupported { pos: Pos, msg: String },

    #[error("predicate `{predicate}` expects {expected} argument(s), got {found} at {pos}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
        pos: Pos,
    },

    #[error("undeclared predicate `{name}` at {pos}")]
    UndeclaredPredicate { name: String, pos: Pos },

    #[error("undeclared object `{name}` at {pos}")]
    UndeclaredObject { name: String, pos: Pos },

    #[error("variable `{var}` is not a parameter of `{schema}` ({pos})")]
    UndeclaredVariable {
        schema: String,
        var: String,
        pos: Pos,
    },

    #[error("undeclared type `{name}` at {pos}")]
    UndeclaredType { name: String, pos: Pos },

    #[error("duplicate action schema `{name}` at {pos}")]
    DuplicateSchema { name: String, pos: Pos },

    #[error("problem targets domain `{found}` but domain is `{expected}`")]
    DomainMismatch { expected: String, found: String },

    #[error("negative literal `{literal}` must be compiled away before grounding")]
    UncompiledNegation { literal: String },

    #[error("goal literal `{literal}` cannot be grounded: {reason}")]
    NotGroundable { literal: String, reason: String },

    #[error("no goal description to ground")]
    NoGoals,
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        PddlError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    /// Source position, when the error originates from parsed text.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            PddlError::Syntax { pos, .. }
            | PddlError::UnsupportedRequirement { pos, .. }
            | PddlError::Unsupported { pos, .. }
            | PddlError::ArityMismatch { pos, .. }
            | PddlError::UndeclaredPredicate { pos, .. }
            | PddlError::UndeclaredObject { pos, .. }
            | PddlError::UndeclaredVariable { pos, .. }
            | PddlError::UndeclaredType { pos, .. }
            | PddlError::DuplicateSchema { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}
