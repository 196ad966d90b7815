//! Command-line front end and HTTP API over the classification engine.

pub mod cli;
pub mod config;
pub mod error;
pub mod http;
pub mod service;

pub use cli::run;
pub use config::ServiceConfig;
pub use error::ServiceError;
pub use service::Service;
