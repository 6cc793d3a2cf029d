use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed predicate: {0}")]
    MalformedPredicate(String),

    #[error("theory capability missing: {0}")]
    CapabilityMissing(String),

    #[error("theory mismatch: {0}")]
    TheoryMismatch(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("letter outside the theory domain: {0}")]
    InputType(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("formula outside the guarded fragment: {0}")]
    Fragment(String),

    #[error("unknown variable: {0}")]
    Scope(String),

    #[error("invalid assignment: {0}")]
    Assignment(String),

    #[error("input specifier zone violation: {0}")]
    ZoneViolation(String),

    #[error("invalid automaton document: {0}")]
    Document(String),

    #[error("processor invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn syntax(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// Errors that stem from an operation the theory cannot perform, as
    /// opposed to malformed input.
    pub fn is_capability(&self) -> bool {
        matches!(self, Error::CapabilityMissing(_) | Error::Resource(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
