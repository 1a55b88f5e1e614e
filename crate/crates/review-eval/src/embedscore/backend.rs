//! Embedding backends: the deterministic offline stub and the remote HTTP
//! client with bounded retries and batch caps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{EmbedError, EmbeddingVector};
use crate::corpus::tokenize;

pub const STUB_DIMENSION: usize = 256;
pub const MAX_BATCH: usize = 64;

/// Batch text-to-vector interface. Implementations must preserve input
/// order and cardinality.
pub trait EmbeddingBackend: Send + Sync {
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

/// Deterministic feature-hashed bag-of-tokens vectors (dimension 256).
/// A test double for offline runs, never a reportable metric.
pub struct StubBackend {
    id: String,
    calls: AtomicUsize,
}

impl StubBackend {
    pub fn new() -> Self {
        StubBackend {
            id: "stub".to_string(),
            calls: AtomicUsize::new(0),
        }
    }

    /// Number of embed() invocations so far (for cache-hit assertions).
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Default for StubBackend {
    fn default() -> Self {
        Self::new()
    }
}

fn stub_vector(text: &str) -> Vec<f64> {
    let mut values = vec![0.0f64; STUB_DIMENSION];
    for token in tokenize(text).tokens {
        let digest = Sha256::digest(token.as_bytes());
        let h = u64::from_le_bytes(digest[..8].try_into().unwrap());
        let index = (h % STUB_DIMENSION as u64) as usize;
        let sign = if digest[8] & 1 == 0 { 1.0 } else { -1.0 };
        values[index] += sign;
    }
    if values.iter().all(|v| *v == 0.0) {
        values[0] = 1.0;
    }
    values
}

impl EmbeddingBackend for StubBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        STUB_DIMENSION
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        texts
            .iter()
            .map(|t| EmbeddingVector::new(stub_vector(t), self.id.clone()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RemoteEmbeddingConfig {
    pub id: String,
    pub base_url: String,
    pub model: String,
    pub api_key: String,
    pub dimension: usize,
    pub retry_limit: u32,
    /// Maximum in-flight batch requests.
    pub concurrency: usize,
}

/// OpenAI-style embeddings endpoint: POST {base_url}/embeddings with
/// {"model", "input": [...]}, response {"data": [{"embedding": [...]}]}.
pub struct RemoteEmbeddingBackend {
    config: RemoteEmbeddingConfig,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl RemoteEmbeddingBackend {
    pub fn new(config: RemoteEmbeddingConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .expect("client construction");
        RemoteEmbeddingBackend { config, client }
    }

    fn request_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let url = format!("{}/embeddings", self.config.base_url.trim_end_matches('/'));
        let body = serde_json::json!({
            "model": self.config.model,
            "input": texts,
        });
        let mut last_error = String::new();
        for attempt in 0..self.config.retry_limit.max(1) {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(500 * (1 << attempt)));
            }
            let response = self
                .client
                .post(&url)
                .bearer_auth(&self.config.api_key)
                .json(&body)
                .send();
            match response.and_then(|r| r.error_for_status()) {
                Ok(r) => {
                    let parsed: EmbeddingResponse =
                        r.json().map_err(|e| EmbedError::Transport {
                            backend: self.config.id.clone(),
                            reason: format!("bad response body: {e}"),
                        })?;
                    return parsed
                        .data
                        .into_iter()
                        .map(|d| EmbeddingVector::new(d.embedding, self.config.id.clone()))
                        .collect();
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(EmbedError::Transport {
            backend: self.config.id.clone(),
            reason: last_error,
        })
    }
}

impl EmbeddingBackend for RemoteEmbeddingBackend {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn dimension(&self) -> usize {
        self.config.dimension
    }

    /// Splits the input into batches of at most [`MAX_BATCH`] texts and
    /// issues up to `concurrency` requests in flight; results are emitted
    /// in input order regardless of completion order.
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let chunks: Vec<&[String]> = texts.chunks(MAX_BATCH).collect();
        let workers = self.config.concurrency.max(1).min(chunks.len().max(1));
        if workers <= 1 {
            let mut out = Vec::with_capacity(texts.len());
            for chunk in chunks {
                out.extend(self.request_batch(chunk)?);
            }
            return Ok(out);
        }
        let next = AtomicUsize::new(0);
        let results: Vec<std::sync::Mutex<Option<Result<Vec<EmbeddingVector>, EmbedError>>>> =
            chunks.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= chunks.len() {
                        break;
                    }
                    *results[i].lock().unwrap() = Some(self.request_batch(chunks[i]));
                });
            }
        });
        let mut out = Vec::with_capacity(texts.len());
        for slot in results {
            out.extend(slot.into_inner().unwrap().expect("worker filled slot")?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stub_is_deterministic_and_order_preserving() {
        let backend = StubBackend::new();
        let texts = vec!["we need super".to_string(), "swallow?".to_string()];
        let a = backend.embed(&texts).unwrap();
        let b = backend.embed(&texts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].dimension(), STUB_DIMENSION);
        assert_ne!(a[0], a[1]);
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn identical_texts_identical_vectors() {
        let backend = StubBackend::new();
        let texts = vec!["same text".to_string(), "same text".to_string()];
        let v = backend.embed(&texts).unwrap();
        assert_eq!(v[0], v[1]);
    }
}
