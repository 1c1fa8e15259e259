use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("rank deficient: expected rank {expected}, numeric rank {found}")]
    Rank { expected: usize, found: usize },

    #[error("empty polytope")]
    Empty,

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schedule failed to terminate: {0}")]
    ScheduleFailed(String),

    #[error("sampling exceeded {0} steps without convergence")]
    StepCap(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Self::Parse {
            line,
            msg: msg.into(),
        }
    }
}
