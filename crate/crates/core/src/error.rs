use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at position {position}: unexpected {found:?} ({reason})")]
    UnknownSymbol {
        found: char,
        position: usize,
        reason: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("alphabet mismatch: word over {left} generators vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("arity mismatch: expected {expected} permutations, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("budget exceeded: {what} needs {required}, ceiling is {ceiling}")]
    Budget {
        what: String,
        required: u128,
        ceiling: u128,
    },

    #[error("probe sets differ")]
    ProbeMismatch,

    #[error("not a subset: {0}")]
    NotSubset(String),

    #[error("no comparison solutions available at degree {0}")]
    NoComparisonSolutions(usize),

    #[error("negative instance {index} is not certified far: {reason}")]
    Uncertified { index: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, required: u128, ceiling: u128) -> Self {
        Error::Budget {
            what: what.into(),
            required,
            ceiling,
        }
    }

    /// Whether this is a budget refusal (as opposed to malformed input).
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }

    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::UnknownSymbol { .. }
                | Error::Parse(_)
                | Error::InvalidAlphabet(_)
                | Error::InvalidPermutation(_)
        )
    }
}
