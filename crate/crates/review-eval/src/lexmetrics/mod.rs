//! Reference lexical metrics: Exact Match, BLEU, ROUGE-1/ROUGE-L, METEOR.
//!
//! All operations are pure functions over [`TokenSequence`]s (except
//! [`exact_match`], which works on whitespace-normalized raw text).

mod bleu;
mod meteor;
mod rouge;

pub use bleu::{bleu, BleuConfig, Smoothing};
pub use meteor::meteor;
pub use rouge::{rouge, RougeScores};

use crate::corpus::{normalize_whitespace, Review};
use thiserror::Error;

/// Canonical metric names used in score maps and reports.
pub const METRIC_EXACT_MATCH: &str = "exact_match";
pub const METRIC_BLEU: &str = "bleu";
pub const METRIC_ROUGE1: &str = "rouge1";
pub const METRIC_ROUGE_L: &str = "rougeL";
pub const METRIC_METEOR: &str = "meteor";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("reference token sequence is empty")]
    EmptyReference,
    #[error("generated token sequence is empty")]
    EmptyGenerated,
    #[error("invalid bleu config: {0}")]
    InvalidConfig(String),
}

/// True iff the whitespace-normalized texts are byte-identical (case-sensitive).
pub fn exact_match(generated: &Review, reference: &Review) -> bool {
    normalize_whitespace(generated.text()) == normalize_whitespace(reference.text())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn review(s: &str) -> Review {
        Review::new(s).unwrap()
    }

    #[test]
    fn exact_match_examples() {
        assert!(exact_match(&review("swallow?"), &review("swallow?")));
        assert!(!exact_match(&review("swallow?"), &review("stringbuilder?")));
        assert!(exact_match(&review("a  b"), &review("a b")));
        // case-sensitive
        assert!(!exact_match(&review("Swallow?"), &review("swallow?")));
    }
}
