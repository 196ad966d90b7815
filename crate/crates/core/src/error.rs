use thiserror::Error;

use crate::notation::{NotationError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Notation(#[from] NotationError),
    #[error("{what} not found: {key}")]
    NotFound { what: &'static str, key: String },
    #[error("no captions in language {0:?} anywhere in the scheme")]
    UnknownLanguage(String),
    #[error("hierarchy cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("{0}")]
    Synthesis(String),
    #[error("source {notation} lies outside {left}-{right}")]
    OutOfSpan {
        notation: String,
        left: String,
        right: String,
    },
    #[error("strip prefix {prefix} does not prefix source {notation}")]
    MalformedSource { notation: String, prefix: String },
    #[error("facet formula: {0}")]
    Formula(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn not_found(what: &'static str, key: impl Into<String>) -> Self {
        Error::NotFound { what, key: key.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
