use thiserror::Error;

use crate::dsl::ParseError;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A level enumeration would exceed the configured per-level vertex cap.
    #[error("level {level} of the {arity}-ary tree exceeds the vertex budget of {budget} vertices")]
    BudgetExceeded {
        arity: usize,
        level: usize,
        budget: u64,
    },

    #[error("vertex budget {requested} is out of range (must be between 1 and {max})")]
    BudgetOutOfRange { requested: u64, max: u64 },

    #[error("word has length {found} but level {expected} was expected")]
    LevelMismatch { expected: usize, found: usize },

    #[error("depth {requested} exceeds the available depth {available}")]
    DepthExceeded { available: usize, requested: usize },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown builtin automaton `{0}`")]
    UnknownBuiltin(String),

    #[error("unknown shape `{0}` (expected line, full:<arity>, lamplighter-a, lamplighter-b, sushchansky:<p>, or eventually-regular:<level>:<arity>)")]
    UnknownShape(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),
}

pub type Result<T> = std::result::Result<T, Error>;
