//! JSON configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use platoon_cache_core::config::{ConfigError, SimConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
}

fn resolve(base: &Path, p: &mut String) {
    if !p.is_empty() && Path::new(p.as_str()).is_relative() {
        *p = base.join(p.as_str()).to_string_lossy().into_owned();
    }
}

/// Parses and validates a config file. Relative dataset and recording
/// paths are taken relative to the file's directory. Missing keys keep
/// their defaults; unknown keys are rejected.
pub fn load_config(path: &Path) -> Result<SimConfig, ConfigFileError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigFileError::Io { path: path.to_owned(), source })?;
    let mut config: SimConfig =
        serde_json::from_str(&text).map_err(|source| ConfigFileError::Json { path: path.to_owned(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve(base, &mut config.users_path);
    resolve(base, &mut config.movies_path);
    resolve(base, &mut config.ratings_path);
    if let Some(r) = config.record_path.as_mut() {
        resolve(base, r);
    }
    config
        .validate()
        .map_err(|source| ConfigFileError::Invalid { path: path.to_owned(), source })?;
    Ok(config)
}
