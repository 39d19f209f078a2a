use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use turkpos::TrainConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("environment variable {var}: {reason}")]
    Env { var: &'static str, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Settings shared by the server and the command line.
///
/// ```toml
/// listen = "127.0.0.1:8080"
/// model_path = "models/seed.blstm"
/// corpus_path = "data/seed.tsv"
/// store_dir = "store"
/// max_body_bytes = 1048576
///
/// [train]
/// epochs = 30
/// seed = 42
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Initial model, used when the store holds no versioned model yet.
    pub model_path: Option<PathBuf>,
    /// Base corpus that corrections are merged into on retraining.
    pub corpus_path: Option<PathBuf>,
    pub store_dir: PathBuf,
    pub max_body_bytes: usize,
    pub train: TrainConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            model_path: None,
            corpus_path: None,
            store_dir: PathBuf::from("store"),
            max_body_bytes: 1 << 20,
            train: TrainConfig::default(),
        }
    }
}

impl ServiceConfig {
    /// Reads a TOML file, then applies `TURKPOS_*` environment overrides.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let mut config = Self::from_file(path)?;
        config.apply_env(|var| std::env::var(var).ok())?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config: Self = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Overrides from `TURKPOS_LISTEN`, `TURKPOS_MODEL_PATH`,
    /// `TURKPOS_CORPUS_PATH`, `TURKPOS_STORE_DIR` and `TURKPOS_MAX_BODY_BYTES`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = lookup("TURKPOS_LISTEN") {
            self.listen = v.parse().map_err(|e| ConfigError::Env {
                var: "TURKPOS_LISTEN",
                reason: format!("{e}"),
            })?;
        }
        if let Some(v) = lookup("TURKPOS_MODEL_PATH") {
            self.model_path = Some(v.into());
        }
        if let Some(v) = lookup("TURKPOS_CORPUS_PATH") {
            self.corpus_path = Some(v.into());
        }
        if let Some(v) = lookup("TURKPOS_STORE_DIR") {
            self.store_dir = v.into();
        }
        if let Some(v) = lookup("TURKPOS_MAX_BODY_BYTES") {
            self.max_body_bytes = v.parse().map_err(|e| ConfigError::Env {
                var: "TURKPOS_MAX_BODY_BYTES",
                reason: format!("{e}"),
            })?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_body_bytes == 0 {
            return Err(ConfigError::Invalid("max_body_bytes must be positive".into()));
        }
        self.train.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn partial_file_keeps_defaults() {
        let c: ServiceConfig = toml::from_str("store_dir = \"/tmp/x\"\n[train]\nepochs = 5\n").unwrap();
        assert_eq!(c.store_dir, PathBuf::from("/tmp/x"));
        assert_eq!(c.train.epochs, 5);
        assert_eq!(c.train.hidden_dim, TrainConfig::default().hidden_dim);
        assert_eq!(c.max_body_bytes, 1 << 20);
        assert!(toml::from_str::<ServiceConfig>("colour = 1").is_err());
    }

    #[test]
    fn environment_overrides() {
        let env = HashMap::from([("TURKPOS_LISTEN", "0.0.0.0:9000"), ("TURKPOS_MAX_BODY_BYTES", "64")]);
        let mut c = ServiceConfig::default();
        c.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(c.listen.port(), 9000);
        assert_eq!(c.max_body_bytes, 64);

        let bad = HashMap::from([("TURKPOS_MAX_BODY_BYTES", "lots")]);
        assert!(matches!(
            c.apply_env(|k| bad.get(k).map(|v| v.to_string())),
            Err(ConfigError::Env {
                var: "TURKPOS_MAX_BODY_BYTES",
                ..
            })
        ));
    }
}
