use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::ServiceError;

pub const CONFIG_ENV: &str = "CLASSWEAVE_CONFIG";
pub const DEFAULT_CONFIG: &str = "classweave.toml";

/// Service settings. Relative paths in a config file resolve against the
/// file's directory.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    /// The first scheme is primary: documents are ingested against it.
    pub scheme_paths: Vec<PathBuf>,
    #[serde(default)]
    pub docs_paths: Vec<PathBuf>,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_lang")]
    pub default_lang: String,
    #[serde(default = "default_min_hits")]
    pub min_hits_default: usize,
}

fn default_port() -> u16 {
    8080
}

fn default_lang() -> String {
    "en".into()
}

fn default_min_hits() -> usize {
    10
}

impl ServiceConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, ServiceError> {
        let mut config: ServiceConfig =
            toml::from_str(text).map_err(|e| ServiceError::Config(format!("config: {}", e.message())))?;
        for path in config.scheme_paths.iter_mut().chain(config.docs_paths.iter_mut()) {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Explicit path, then the environment variable, then the default name
    /// in the working directory.
    pub fn locate(explicit: Option<&Path>) -> PathBuf {
        explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CONFIG))
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.scheme_paths.is_empty() {
            return Err(ServiceError::Config(
                "config: at least one scheme path is required".into(),
            ));
        }
        if self.port == 0 {
            return Err(ServiceError::Config("config: port must be in 1..=65535".into()));
        }
        Ok(())
    }
}
