use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate key at line {line}: {key}")]
    DuplicateKey { line: u64, key: String },

    #[error("no boundary polygons supplied")]
    NoBoundaries,

    #[error("feature spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{0}` appears more than once in a rank table")]
    DuplicateFeature(String),

    #[error("no country observes feature `{0}`; nothing to copy from")]
    NoDonor(String),

    #[error("country `{0}` has no development score")]
    MissingDevelopmentScore(String),

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("non-positive value {value} at position {index}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("coverage for `{0}` is not monotone in time")]
    NonMonotoneCoverage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pipeline invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
