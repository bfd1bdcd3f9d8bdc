use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure is degenerate: support is a single point")]
    DegenerateMeasure,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("configurations differ in length or alphabet")]
    MixedDimensions,

    #[error("not an antichain: {first:?} and {second:?} are comparable")]
    NotAntichain { first: Vec<u32>, second: Vec<u32> },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("margin assumption violated: {0}")]
    MarginViolation(String),

    #[error("gap threshold {v_threshold} exceeds x+ - x- = {width}")]
    GapMismatch { v_threshold: f64, width: f64 },

    #[error("could not derive margin parameters: {0}")]
    MarginDerivationFailed(String),

    #[error("support of the measure is not contained in [0, {max}]")]
    SupportViolation { max: f64 },

    #[error("chasing gap is not positive at p = {p} (beta+ = {beta})")]
    GapViolation { p: f64, beta: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
