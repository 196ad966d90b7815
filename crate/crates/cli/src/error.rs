use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    Usage(String),
    #[error("{message}")]
    Parse { message: String, offset: usize },
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Config(String),
}

/// Error body shared by the JSON CLI output and the HTTP API.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

impl ServiceError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ServiceError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::Usage(_) => "usage",
            ServiceError::Parse { .. } => "parse",
            ServiceError::NotFound(_) => "not-found",
            ServiceError::Invalid(_) => "invalid",
            ServiceError::Config(_) => "config",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.kind(),
            message: self.to_string(),
            offset: match self {
                ServiceError::Parse { offset, .. } => Some(*offset),
                _ => None,
            },
        }
    }
}

impl From<classweave_core::Error> for ServiceError {
    fn from(e: classweave_core::Error) -> Self {
        use classweave_core::Error as E;
        match e {
            E::Parse(p) => ServiceError::Parse {
                message: format!("parse error: {p}"),
                offset: p.offset,
            },
            e @ E::NotFound { .. } => ServiceError::NotFound(e.to_string()),
            e @ E::Io { .. } => ServiceError::Config(e.to_string()),
            e => ServiceError::Invalid(e.to_string()),
        }
    }
}
