//! Embedding-based semantic scoring: pluggable backends, cosine similarity,
//! a persistent vector cache, and the similarity-to-grade classifier.

mod backend;
mod cache;
mod classifier;

pub use backend::{EmbeddingBackend, RemoteEmbeddingBackend, RemoteEmbeddingConfig, StubBackend};
pub use cache::EmbeddingCache;
pub use classifier::{classify, fit_grade_classifier, GradeThresholds};

use thiserror::Error;

use crate::corpus::ReviewPair;

pub const METRIC_EMBEDDING: &str = "embedding";

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("backend `{backend}` returned {got} vectors for {expected} inputs")]
    CardinalityMismatch {
        backend: String,
        expected: usize,
        got: usize,
    },
    #[error("backend `{backend}` transport failure: {reason}")]
    Transport { backend: String, reason: String },
    #[error("cache corruption: {0}")]
    CacheCorrupt(String),
    #[error("cache io: {0}")]
    CacheIo(#[from] std::io::Error),
    #[error("classifier requires a non-empty sample set")]
    EmptySampleSet,
}

/// Fixed-dimension real vector produced by an embedding backend.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub backend_id: String,
}

impl EmbeddingVector {
    /// All-zero vectors are rejected at ingestion.
    pub fn new(values: Vec<f64>, backend_id: impl Into<String>) -> Result<Self, EmbedError> {
        if values.iter().all(|v| *v == 0.0) {
            return Err(EmbedError::ZeroNorm);
        }
        Ok(EmbeddingVector {
            values,
            backend_id: backend_id.into(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// (v . v') / (|v| |v'|), clamped to [-1, 1] against floating-point drift.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbedError> {
    if a.dimension() != b.dimension() {
        return Err(EmbedError::DimensionMismatch(a.dimension(), b.dimension()));
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(EmbedError::ZeroNorm);
    }
    Ok((dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(-1.0, 1.0))
}

/// Embeds both texts of a pair (cache-first) and returns their cosine
/// similarity. Newly fetched vectors are appended to the cache.
pub fn embed_and_score(
    pair: &ReviewPair,
    backend: &dyn EmbeddingBackend,
    cache: &mut EmbeddingCache,
) -> Result<f64, EmbedError> {
    let texts = [pair.generated.text(), pair.reference.text()];
    let vectors = embed_cached(&texts, backend, cache)?;
    cosine_similarity(&vectors[0], &vectors[1])
}

/// Batch embedding through the cache; preserves input order.
pub fn embed_cached(
    texts: &[&str],
    backend: &dyn EmbeddingBackend,
    cache: &mut EmbeddingCache,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let mut result: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
    for (i, text) in texts.iter().enumerate() {
        result[i] = cache.get(backend.id(), text)?;
    }
    // fetch each missing text once, even if it repeats within the batch
    let mut unique_texts: Vec<String> = Vec::new();
    for (i, text) in texts.iter().enumerate() {
        if result[i].is_none() && !unique_texts.iter().any(|t| t == text) {
            unique_texts.push(text.to_string());
        }
    }
    if !unique_texts.is_empty() {
        let fetched = backend.embed(&unique_texts)?;
        if fetched.len() != unique_texts.len() {
            return Err(EmbedError::CardinalityMismatch {
                backend: backend.id().to_string(),
                expected: unique_texts.len(),
                got: fetched.len(),
            });
        }
        for (text, vector) in unique_texts.iter().zip(&fetched) {
            cache.put(backend.id(), text, vector)?;
        }
        for (i, text) in texts.iter().enumerate() {
            if result[i].is_none() {
                let pos = unique_texts.iter().position(|t| t == text).unwrap();
                result[i] = Some(fetched[pos].clone());
            }
        }
    }
    Ok(result.into_iter().map(Option::unwrap).collect())
}
