use std::path::PathBuf;

use crate::profile::SeriesKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no input values")]
    EmptyInput,

    #[error("non-finite sample {value} at index {index}")]
    NonFiniteSample { index: usize, value: f64 },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown slice `{slice}` for variable `{variable}`")]
    UnknownSlice { variable: String, slice: String },

    #[error("common support omits source support point {0}")]
    SupportNotCovered(f64),

    #[error("support vector is not strictly increasing at index {0}")]
    UnsortedSupport(usize),

    #[error("no distance computed for key `{0}`")]
    MissingKey(SeriesKey),

    #[error("period must be positive, got {0}")]
    NonPositivePeriod(f64),

    #[error("inconsistent timing: {0}")]
    InconsistentTiming(String),

    #[error("hold {hold} exceeds period {period}")]
    HoldExceedsPeriod { hold: f64, period: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("trace has no records")]
    EmptyTrace,

    #[error("no control action was ever applied")]
    NoWriters,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    /// Stable variant name, used in single-line machine-parsable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::NonFiniteSample { .. } => "NonFiniteSample",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::UnknownSlice { .. } => "UnknownSlice",
            Error::SupportNotCovered(_) => "SupportNotCovered",
            Error::UnsortedSupport(_) => "UnsortedSupport",
            Error::MissingKey(_) => "MissingKey",
            Error::NonPositivePeriod(_) => "NonPositivePeriod",
            Error::InconsistentTiming(_) => "InconsistentTiming",
            Error::HoldExceedsPeriod { .. } => "HoldExceedsPeriod",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ConfigMismatch(_) => "ConfigMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::EmptyTrace => "EmptyTrace",
            Error::NoWriters => "NoWriters",
            Error::Parse { .. } => "Parse",
            Error::Read { .. } => "Read",
            Error::Write { .. } => "Write",
            Error::Json(_) => "Json",
            Error::Stage { source, .. } => source.kind(),
        }
    }

    /// Process exit status: 2 for bad input or configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Write { .. } => 1,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
