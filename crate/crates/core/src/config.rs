//! The TOML/JSON configuration file shared by the CLI and the service.
//!
//! ```toml
//! lexicon_manifest = "lexicons/manifest.json"
//!
//! [corpus]
//! format = "jsonl"
//! default_project = "aurelia"
//! [corpus.fields]
//! message_id = "id"
//!
//! [filter]
//! ignore_code = true
//! min_spans = 1
//!
//! [dare]
//! strategy = "mask"
//!
//! [service]
//! bind = "127.0.0.1:8080"
//! runs_dir = "runs"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusFormat, FieldMapping};
use crate::dare::DareConfig;
use crate::detect::FilterConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    NotFound(PathBuf),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CorpusSettings {
    /// Inferred from the corpus extension when absent.
    pub format: Option<CorpusFormat>,
    pub fields: FieldMapping,
    pub default_project: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceSettings {
    pub bind: String,
    pub runs_dir: PathBuf,
    /// Maximum `/v1/check` text length in Unicode scalars.
    pub max_text_len: usize,
    /// Allowed CORS origin; `*` allows any.
    pub cors_origin: String,
}

impl Default for ServiceSettings {
    fn default() -> Self {
        ServiceSettings {
            bind: "127.0.0.1:8080".to_string(),
            runs_dir: PathBuf::from("runs"),
            max_text_len: 10_000,
            cors_origin: "*".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub lexicon_manifest: PathBuf,
    #[serde(default)]
    pub corpus: CorpusSettings,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub dare: DareConfig,
    #[serde(default)]
    pub service: ServiceSettings,
}

impl Config {
    pub fn new(lexicon_manifest: impl Into<PathBuf>) -> Self {
        Config {
            lexicon_manifest: lexicon_manifest.into(),
            corpus: CorpusSettings::default(),
            filter: FilterConfig::default(),
            dare: DareConfig::default(),
            service: ServiceSettings::default(),
        }
    }

    /// Loads `.json` as JSON and anything else as TOML.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ConfigError::NotFound(path.to_path_buf()),
            _ => ConfigError::Io {
                path: path.to_path_buf(),
                source: e,
            },
        })?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg: Config = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        }
        .map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.validate()?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.lexicon_manifest = resolve(base, &cfg.lexicon_manifest);
        cfg.service.runs_dir = resolve(base, &cfg.service.runs_dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.filter.min_spans < 1 {
            return Err(ConfigError::Invalid(
                "filter.min_spans must be at least 1".into(),
            ));
        }
        if self.dare.max_passes < 1 {
            return Err(ConfigError::Invalid(
                "dare.max_passes must be at least 1".into(),
            ));
        }
        if self.service.max_text_len < 1 {
            return Err(ConfigError::Invalid(
                "service.max_text_len must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
