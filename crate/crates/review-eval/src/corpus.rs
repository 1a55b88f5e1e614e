//! Benchmark data model, JSON Lines loading/saving, text normalization,
//! tokenization, and deterministic stride sampling.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: field `{field}` is invalid: {reason}")]
    InvalidField {
        line: usize,
        field: &'static str,
        reason: String,
    },
    #[error("line {line}: duplicate record id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("stride must be >= 1")]
    ZeroStride,
    #[error("grade must be an integer in 1..=5, got {0}")]
    GradeOutOfRange(i64),
    #[error("review text is empty")]
    EmptyReview,
}

/// A single review comment in natural language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Review {
    text: String,
}

impl Review {
    /// Rejects text that is empty after whitespace trimming.
    pub fn new(text: impl Into<String>) -> Result<Self, CorpusError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyReview);
        }
        Ok(Review { text })
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// A generated review and its human reference, with optional code context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewPair {
    pub id: String,
    pub generated: Review,
    pub reference: Review,
    pub code_before: Option<String>,
    pub code_after: Option<String>,
    pub generator: Option<String>,
}

/// Human grade on the five-point rubric (1 = unrelated .. 5 = identical).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grade(u8);

impl Grade {
    pub fn new(value: i64) -> Result<Self, CorpusError> {
        if (1..=5).contains(&value) {
            Ok(Grade(value as u8))
        } else {
            Err(CorpusError::GradeOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// A review pair plus optional human grade and computed metric scores.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedRecord {
    pub pair: ReviewPair,
    pub human_grade: Option<Grade>,
    /// Metric name -> scalar score, kept in insertion order for stable output.
    pub metric_scores: Vec<(String, f64)>,
}

impl GradedRecord {
    pub fn score(&self, metric: &str) -> Option<f64> {
        self.metric_scores
            .iter()
            .find(|(name, _)| name == metric)
            .map(|(_, v)| *v)
    }

    pub fn set_score(&mut self, metric: &str, value: f64) {
        if let Some(slot) = self.metric_scores.iter_mut().find(|(n, _)| n == metric) {
            slot.1 = value;
        } else {
            self.metric_scores.push((metric.to_string(), value));
        }
    }
}

/// Ordered collection of graded records with pairwise-distinct ids.
#[derive(Debug, Clone, Default)]
pub struct Benchmark {
    pub records: Vec<GradedRecord>,
    pub source: Option<String>,
}

/// Whitespace-split tokens; no token contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Wire format for one benchmark record (JSON Lines, one object per line).
#[derive(Debug, Serialize, Deserialize)]
struct RecordWire {
    id: String,
    generated: String,
    reference: String,
    code_before: Option<String>,
    code_after: Option<String>,
    generator: Option<String>,
    human_grade: Option<i64>,
    scores: Option<serde_json::Map<String, serde_json::Value>>,
}

fn record_from_wire(wire: RecordWire, line: usize) -> Result<GradedRecord, CorpusError> {
    let generated = Review::new(wire.generated).map_err(|_| CorpusError::InvalidField {
        line,
        field: "generated",
        reason: "empty review text".into(),
    })?;
    let reference = Review::new(wire.reference).map_err(|_| CorpusError::InvalidField {
        line,
        field: "reference",
        reason: "empty review text".into(),
    })?;
    let human_grade = wire
        .human_grade
        .map(Grade::new)
        .transpose()
        .map_err(|e| CorpusError::InvalidField {
            line,
            field: "human_grade",
            reason: e.to_string(),
        })?;
    let mut metric_scores = Vec::new();
    if let Some(scores) = wire.scores {
        for (name, value) in scores {
            let v = value.as_f64().ok_or_else(|| CorpusError::InvalidField {
                line,
                field: "scores",
                reason: format!("score `{name}` is not a number"),
            })?;
            metric_scores.push((name, v));
        }
    }
    Ok(GradedRecord {
        pair: ReviewPair {
            id: wire.id,
            generated,
            reference,
            code_before: wire.code_before,
            code_after: wire.code_after,
            generator: wire.generator,
        },
        human_grade,
        metric_scores,
    })
}

fn record_to_wire(record: &GradedRecord) -> RecordWire {
    let scores = if record.metric_scores.is_empty() {
        None
    } else {
        let mut map = serde_json::Map::new();
        for (name, value) in &record.metric_scores {
            map.insert(name.clone(), serde_json::json!(value));
        }
        Some(map)
    };
    RecordWire {
        id: record.pair.id.clone(),
        generated: record.pair.generated.text().to_string(),
        reference: record.pair.reference.text().to_string(),
        code_before: record.pair.code_before.clone(),
        code_after: record.pair.code_after.clone(),
        generator: record.pair.generator.clone(),
        human_grade: record.human_grade.map(|g| g.value() as i64),
        scores,
    }
}

/// JSON value in the benchmark wire schema, for writers that append extra
/// diagnostic fields to a record line.
pub fn record_to_json_value(record: &GradedRecord) -> serde_json::Value {
    serde_json::to_value(record_to_wire(record)).expect("record serialization cannot fail")
}

/// Parses one JSON Lines record; `line` is 1-based and used in diagnostics.
pub fn parse_record_line(text: &str, line: usize) -> Result<GradedRecord, CorpusError> {
    let wire: RecordWire =
        serde_json::from_str(text).map_err(|e| CorpusError::MalformedRecord {
            line,
            reason: e.to_string(),
        })?;
    record_from_wire(wire, line)
}

/// Loads a benchmark from a JSON Lines file, preserving record order.
/// Blank lines are skipped; any invalid record aborts the load with a
/// positional diagnostic.
pub fn load_benchmark(path: impl AsRef<Path>) -> Result<Benchmark, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let record = parse_record_line(&text, line_no)?;
        if !seen.insert(record.pair.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: record.pair.id.clone(),
            });
        }
        records.push(record);
    }
    Ok(Benchmark {
        records,
        source: Some(path.display().to_string()),
    })
}

/// Writes a benchmark as JSON Lines (UTF-8, LF line endings).
pub fn save_benchmark(benchmark: &Benchmark, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    for record in &benchmark.records {
        let wire = record_to_wire(record);
        let json = serde_json::to_string(&wire).expect("record serialization cannot fail");
        writer
            .write_all(json.as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
    }
    writer.flush().map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Deterministic stride sampling: 0-based indices {0, stride, 2*stride, ...} < n_items.
pub fn stride_sample(n_items: usize, stride: usize) -> Result<Vec<usize>, CorpusError> {
    if stride == 0 {
        return Err(CorpusError::ZeroStride);
    }
    Ok((0..n_items).step_by(stride).collect())
}

/// Lowercases, splits on whitespace, and isolates every non-alphanumeric
/// character as a standalone token.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.to_lowercase().chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(ch.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenSequence { tokens }
}

/// Trims and collapses internal whitespace runs to single spaces.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
