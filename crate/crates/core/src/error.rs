use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("empty element subset")]
    EmptySubset,

    #[error("subset does not contain the interpretation of constant `{0}`")]
    MissingConstant(String),

    #[error("vocabulary mismatch")]
    VocabularyMismatch,

    #[error("operation `{0}` requires a vocabulary without constant symbols")]
    ConstantsPresent(&'static str),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("unknown constant `{0}`")]
    UnknownConstant(String),

    #[error("predicate `{name}` has arity {expected}, got {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("free variable `{0}` has no assigned element")]
    UnassignedVariable(String),

    #[error("expected a sentence, found free variables: {0:?}")]
    NotASentence(Vec<String>),

    #[error("at most {limit} marked elements allowed, got {given}")]
    TooManyMarks { given: usize, limit: usize },

    #[error("invalid element or node {0}")]
    InvalidElement(usize),

    #[error("{what} exceeds guard of {limit}")]
    GuardExceeded { what: String, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
