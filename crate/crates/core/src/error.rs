use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by callers that map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Input could not be read or is structurally malformed.
    Input,
    /// Input was readable but violates a data contract.
    Validation,
    /// A numerical routine could not produce a result (rank deficiency, singular blocks).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: header is missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("duplicate respondent_id `{id}` at line {line}")]
    DuplicateRespondent { id: String, line: u64 },

    #[error("degrees of freedom must be positive")]
    ZeroDegreesOfFreedom,

    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no local records to aggregate")]
    EmptyLocalSubset,

    #[error("group {group}: percentages sum to {sum}, expected 100 ± 0.5")]
    PercentageSum { group: usize, sum: f64 },

    #[error("contingency table needs at least 2 rows and 2 columns, got {rows}x{cols}")]
    TableShape { rows: usize, cols: usize },

    #[error("contingency table has an empty {0}")]
    ZeroMargin(&'static str),

    #[error("zone `{0}` has respondents but no zone-table entry")]
    MissingZone(String),

    #[error("income quantile table for zone `{0}` is empty or not increasing")]
    BadQuantileTable(String),

    #[error("design matrix has {n} rows for {k} columns")]
    TooFewObservations { n: usize, k: usize },

    #[error("rank deficient design: column `{column}` is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("restricted covariance block is singular")]
    SingularCovariance,

    #[error("duplicate tourist spot `{0}`")]
    DuplicateSpot(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Csv { .. } | Error::MissingColumn { .. } => ErrorKind::Input,
            Error::RankDeficient { .. }
            | Error::SingularCovariance
            | Error::TooFewObservations { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
