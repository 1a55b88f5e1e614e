//! Persistent embedding cache: JSON Lines, one record per vector, keyed by
//! sha256(backend_id, whitespace-normalized text). Writes are append-only,
//! one line per record.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbedError, EmbeddingVector};
use crate::corpus::normalize_whitespace;

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    backend: String,
    dim: usize,
    vector: Vec<f64>,
}

pub struct EmbeddingCache {
    path: Option<PathBuf>,
    entries: HashMap<String, CacheRecord>,
    /// Dimension observed per backend, used to detect corruption.
    dims: HashMap<String, usize>,
}

pub fn cache_key(backend_id: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(backend_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(normalize_whitespace(text).as_bytes());
    hex::encode(hasher.finalize())
}

impl EmbeddingCache {
    /// In-memory cache with no backing file.
    pub fn in_memory() -> Self {
        EmbeddingCache {
            path: None,
            entries: HashMap::new(),
            dims: HashMap::new(),
        }
    }

    /// Parses cache records from JSON Lines text into an in-memory cache.
    pub fn from_lines(text: &str) -> Result<Self, EmbedError> {
        let mut cache = EmbeddingCache::in_memory();
        cache.load_lines(text)?;
        Ok(cache)
    }

    /// Opens (or creates) a file-backed cache and loads all records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, EmbedError> {
        let path = path.as_ref().to_path_buf();
        let mut cache = EmbeddingCache {
            path: Some(path.clone()),
            entries: HashMap::new(),
            dims: HashMap::new(),
        };
        if path.exists() {
            let mut text = String::new();
            BufReader::new(File::open(&path)?).read_to_string(&mut text)?;
            cache.load_lines(&text)?;
        }
        Ok(cache)
    }

    fn load_lines(&mut self, text: &str) -> Result<(), EmbedError> {
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: CacheRecord = serde_json::from_str(line)
                .map_err(|e| EmbedError::CacheCorrupt(format!("line {}: {e}", idx + 1)))?;
            self.insert_record(record, idx + 1)?;
        }
        Ok(())
    }

    fn insert_record(&mut self, record: CacheRecord, line: usize) -> Result<(), EmbedError> {
        if record.vector.len() != record.dim {
            return Err(EmbedError::CacheCorrupt(format!(
                "line {line}: declared dim {} but vector has {} values",
                record.dim,
                record.vector.len()
            )));
        }
        match self.dims.get(&record.backend) {
            Some(dim) if *dim != record.dim => {
                return Err(EmbedError::CacheCorrupt(format!(
                    "line {line}: backend `{}` dimension changed from {dim} to {}",
                    record.backend, record.dim
                )));
            }
            _ => {
                self.dims.insert(record.backend.clone(), record.dim);
            }
        }
        self.entries.insert(record.key.clone(), record);
        Ok(())
    }

    pub fn get(
        &self,
        backend_id: &str,
        text: &str,
    ) -> Result<Option<EmbeddingVector>, EmbedError> {
        match self.entries.get(&cache_key(backend_id, text)) {
            Some(record) => Ok(Some(EmbeddingVector::new(
                record.vector.clone(),
                record.backend.clone(),
            )?)),
            None => Ok(None),
        }
    }

    pub fn put(
        &mut self,
        backend_id: &str,
        text: &str,
        vector: &EmbeddingVector,
    ) -> Result<(), EmbedError> {
        let record = CacheRecord {
            key: cache_key(backend_id, text),
            backend: backend_id.to_string(),
            dim: vector.dimension(),
            vector: vector.values.clone(),
        };
        if let Some(dim) = self.dims.get(backend_id) {
            if *dim != record.dim {
                return Err(EmbedError::CacheCorrupt(format!(
                    "backend `{backend_id}` dimension changed from {dim} to {}",
                    record.dim
                )));
            }
        }
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            let mut line = serde_json::to_string(&record).expect("cache record serializes");
            line.push('\n');
            // single write call keeps each record atomic on the line level
            file.write_all(line.as_bytes())?;
        }
        self.dims.insert(backend_id.to_string(), record.dim);
        self.entries.insert(record.key.clone(), record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
