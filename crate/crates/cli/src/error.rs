use std::path::PathBuf;

use serde::Serialize;
use ztcm_core::{Error as CoreError, ErrorKind};

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    Config = 1,
    Data = 2,
    Numerical = 3,
}

#[derive(Debug, thiserror::Error, Serialize)]
#[error("{message}")]
pub struct CliError {
    pub failure: Failure,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            failure: Failure::Config,
            message: message.into(),
            path: None,
            column: None,
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            failure: Failure::Data,
            ..Self::config(message)
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        Self {
            message: format!("{}: {source}", path.display()),
            path: Some(path),
            ..Self::config("")
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.failure as i32
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        // unreadable files are configuration problems; malformed contents are data problems
        let failure = match e.kind() {
            ErrorKind::Input if matches!(e, CoreError::Io { .. }) => Failure::Config,
            ErrorKind::Input => Failure::Data,
            ErrorKind::Validation => Failure::Data,
            ErrorKind::Numerical => Failure::Numerical,
        };
        let (path, column) = match &e {
            CoreError::Io { path, .. } | CoreError::Csv { path, .. } => (Some(path.clone()), None),
            CoreError::MissingColumn { path, column } => (Some(path.clone()), Some(column.clone())),
            CoreError::RankDeficient { column } => (None, Some(column.clone())),
            _ => (None, None),
        };
        Self {
            failure,
            message: e.to_string(),
            path,
            column,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
