//! Run configuration: a single TOML document mirroring the CLI surface.
//! API keys are never stored in the config, only the names of the
//! environment variables that hold them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedscore::{
    EmbeddingBackend, RemoteEmbeddingBackend, RemoteEmbeddingConfig, StubBackend,
};
use crate::lexmetrics::BleuConfig;
use crate::llmjudge::{LlmBackend, RemoteLlmBackend, RemoteLlmConfig, ScriptedMock};

pub const DEFAULT_LEXICAL_METRICS: [&str; 5] =
    ["exact_match", "bleu", "rouge1", "rougeL", "meteor"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("metric `{metric}` needs a backend but none is configured")]
    MissingBackend { metric: String },
    #[error("backend `{id}`: {reason}")]
    InvalidBackend { id: String, reason: String },
    #[error("no backend with id `{0}` in config")]
    UnknownBackend(String),
    #[error("environment variable `{0}` is not set")]
    MissingApiKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    RemoteEmbedding,
    RemoteLlm,
    StubEmbedding,
    MockLlm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub id: String,
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub dimension: Option<usize>,
    pub concurrency: Option<usize>,
    pub retry_limit: Option<u32>,
    /// Ordered reply list for the scripted mock.
    pub replies: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunConfig {
    pub benchmark: Option<PathBuf>,
    #[serde(default)]
    pub metrics: Vec<String>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Backend id used for the `embedding` metric.
    pub embedding_backend: Option<String>,
    /// Backend id used for the `llm` metric.
    pub llm_backend: Option<String>,
    #[serde(default = "default_bleu")]
    pub bleu: BleuConfig,
    #[serde(default)]
    pub backends: Vec<BackendConfig>,
}

fn default_bleu() -> BleuConfig {
    BleuConfig::default()
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: RunConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for backend in &self.backends {
            if let Some(c) = backend.concurrency {
                if c == 0 {
                    return Err(ConfigError::InvalidBackend {
                        id: backend.id.clone(),
                        reason: "concurrency bound must be >= 1".to_string(),
                    });
                }
            }
            match backend.kind {
                BackendKind::RemoteEmbedding | BackendKind::RemoteLlm => {
                    if backend.base_url.is_none() || backend.model.is_none() {
                        return Err(ConfigError::InvalidBackend {
                            id: backend.id.clone(),
                            reason: "remote backends need base_url and model".to_string(),
                        });
                    }
                    if backend.api_key_env.is_none() {
                        return Err(ConfigError::InvalidBackend {
                            id: backend.id.clone(),
                            reason: "remote backends need api_key_env".to_string(),
                        });
                    }
                }
                BackendKind::MockLlm => {
                    if backend.replies.is_none() {
                        return Err(ConfigError::InvalidBackend {
                            id: backend.id.clone(),
                            reason: "mock_llm needs a replies list".to_string(),
                        });
                    }
                }
                BackendKind::StubEmbedding => {}
            }
        }
        if self.metrics.iter().any(|m| m == "embedding") {
            self.resolve_embedding_id()?;
        }
        if self.metrics.iter().any(|m| m == "llm") {
            self.resolve_llm_id()?;
        }
        Ok(())
    }

    fn backend_config(&self, id: &str) -> Result<&BackendConfig, ConfigError> {
        self.backends
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| ConfigError::UnknownBackend(id.to_string()))
    }

    fn resolve_embedding_id(&self) -> Result<&BackendConfig, ConfigError> {
        if let Some(id) = &self.embedding_backend {
            return self.backend_config(id);
        }
        self.backends
            .iter()
            .find(|b| matches!(b.kind, BackendKind::RemoteEmbedding | BackendKind::StubEmbedding))
            .ok_or(ConfigError::MissingBackend {
                metric: "embedding".to_string(),
            })
    }

    fn resolve_llm_id(&self) -> Result<&BackendConfig, ConfigError> {
        if let Some(id) = &self.llm_backend {
            return self.backend_config(id);
        }
        self.backends
            .iter()
            .find(|b| matches!(b.kind, BackendKind::RemoteLlm | BackendKind::MockLlm))
            .ok_or(ConfigError::MissingBackend {
                metric: "llm".to_string(),
            })
    }

    pub fn build_embedding_backend(&self) -> Result<Box<dyn EmbeddingBackend>, ConfigError> {
        let backend = self.resolve_embedding_id()?;
        match backend.kind {
            BackendKind::StubEmbedding => Ok(Box::new(StubBackend::new())),
            BackendKind::RemoteEmbedding => {
                let api_key = read_api_key(backend)?;
                Ok(Box::new(RemoteEmbeddingBackend::new(RemoteEmbeddingConfig {
                    id: backend.id.clone(),
                    base_url: backend.base_url.clone().unwrap(),
                    model: backend.model.clone().unwrap(),
                    api_key,
                    dimension: backend.dimension.unwrap_or(0),
                    retry_limit: backend.retry_limit.unwrap_or(3),
                    concurrency: backend.concurrency.unwrap_or(4),
                })))
            }
            _ => Err(ConfigError::InvalidBackend {
                id: backend.id.clone(),
                reason: "not an embedding backend".to_string(),
            }),
        }
    }

    pub fn build_llm_backend(&self) -> Result<Box<dyn LlmBackend>, ConfigError> {
        let backend = self.resolve_llm_id()?;
        match backend.kind {
            BackendKind::MockLlm => Ok(Box::new(ScriptedMock::new(
                backend.replies.clone().unwrap(),
            ))),
            BackendKind::RemoteLlm => {
                let api_key = read_api_key(backend)?;
                Ok(Box::new(RemoteLlmBackend::new(RemoteLlmConfig {
                    id: backend.id.clone(),
                    base_url: backend.base_url.clone().unwrap(),
                    model: backend.model.clone().unwrap(),
                    api_key,
                    retry_limit: backend.retry_limit.unwrap_or(3),
                })))
            }
            _ => Err(ConfigError::InvalidBackend {
                id: backend.id.clone(),
                reason: "not an llm backend".to_string(),
            }),
        }
    }
}

fn read_api_key(backend: &BackendConfig) -> Result<String, ConfigError> {
    let var = backend.api_key_env.as_ref().expect("validated");
    std::env::var(var).map_err(|_| ConfigError::MissingApiKey(var.clone()))
}

/// Parses config text without touching the filesystem (also the fuzz entry
/// point for the config format).
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}
