use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed JSON. Line and column are 1-based, as reported by the JSON reader.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("type mismatch on `{attribute}`: condition compares a {expected} value but the event holds a {found} value")]
    TypeMismatch {
        attribute: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("unsupported feature `{term}`: {reason}")]
    UnsupportedFeature { term: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain too large: {size} events exceeds the cap of {cap}")]
    DomainTooLarge { size: u128, cap: u64 },

    #[error("policy comparison with obligations is not supported in strict mode")]
    ObligationsUnsupported,

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub(crate) fn unsupported(term: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::UnsupportedFeature {
            term: term.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        // serde_json appends " at line X column Y" to its Display output.
        let text = err.to_string();
        let message = match text.rfind(" at line ") {
            Some(idx) => text[..idx].to_string(),
            None => text,
        };
        Error::Parse {
            message,
            line: err.line(),
            column: err.column(),
        }
    }
}
