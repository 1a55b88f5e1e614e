//! METEOR with exact-match unigram alignment only (no stemming or synonym
//! stages, keeping the metric deterministic and resource-free).
//!
//! The alignment maximizes matched unigrams, then minimizes chunks
//! (contiguous runs matched in order on both sides). An exhaustive
//! branch-and-bound search finds the optimum; pathologically repetitive
//! inputs fall back to a greedy longest-fragment cover once a node budget
//! is exhausted.

use std::collections::HashMap;

use super::MetricError;
use crate::corpus::TokenSequence;

const SEARCH_NODE_BUDGET: usize = 500_000;

/// P = m/|gen|, R = m/|ref|, F = 10PR/(R + 9P),
/// penalty = 0.5 * (chunks/matches)^3, score = F * (1 - penalty).
pub fn meteor(generated: &TokenSequence, reference: &TokenSequence) -> Result<f64, MetricError> {
    if generated.is_empty() {
        return Err(MetricError::EmptyGenerated);
    }
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }

    let (matches, chunks) = align(&generated.tokens, &reference.tokens);
    if matches == 0 {
        return Ok(0.0);
    }
    let m = matches as f64;
    let precision = m / generated.len() as f64;
    let recall = m / reference.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (chunks as f64 / m).powi(3);
    Ok(f_mean * (1.0 - penalty))
}

/// Maximum matched unigrams and, among maximal alignments, the minimum
/// number of chunks.
pub(crate) fn align(gen: &[String], rf: &[String]) -> (usize, usize) {
    let max_matches = max_match_count(gen, rf);
    if max_matches == 0 {
        return (0, 0);
    }
    let mut search = AlignSearch {
        gen,
        rf,
        max_matches,
        best_chunks: usize::MAX,
        nodes: 0,
        ref_used: vec![false; rf.len()],
        exhausted: false,
    };
    search.dfs(0, 0, 0, None);
    if search.exhausted && search.best_chunks == usize::MAX {
        return greedy_fragment_cover(gen, rf);
    }
    (max_matches, search.best_chunks)
}

fn max_match_count(gen: &[String], rf: &[String]) -> usize {
    let mut ref_counts: HashMap<&String, usize> = HashMap::new();
    for tok in rf {
        *ref_counts.entry(tok).or_insert(0) += 1;
    }
    let mut gen_counts: HashMap<&String, usize> = HashMap::new();
    for tok in gen {
        *gen_counts.entry(tok).or_insert(0) += 1;
    }
    gen_counts
        .iter()
        .map(|(tok, count)| (*count).min(ref_counts.get(*tok).copied().unwrap_or(0)))
        .sum()
}

struct AlignSearch<'a> {
    gen: &'a [String],
    rf: &'a [String],
    max_matches: usize,
    best_chunks: usize,
    nodes: usize,
    ref_used: Vec<bool>,
    exhausted: bool,
}

impl AlignSearch<'_> {
    /// `prev` is the ref index matched at gen position `i - 1`, if any.
    fn dfs(&mut self, i: usize, matched: usize, chunks: usize, prev: Option<usize>) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > SEARCH_NODE_BUDGET {
            self.exhausted = true;
            return;
        }
        // cannot reach the maximal match count anymore
        if matched + (self.gen.len() - i) < self.max_matches {
            return;
        }
        if chunks >= self.best_chunks {
            return;
        }
        if i == self.gen.len() {
            if matched == self.max_matches {
                self.best_chunks = chunks;
            }
            return;
        }
        for j in 0..self.rf.len() {
            if self.ref_used[j] || self.gen[i] != self.rf[j] {
                continue;
            }
            let continues_run = prev == Some(j.wrapping_sub(1)) && j > 0;
            let next_chunks = if continues_run { chunks } else { chunks + 1 };
            self.ref_used[j] = true;
            self.dfs(i + 1, matched + 1, next_chunks, Some(j));
            self.ref_used[j] = false;
        }
        // leave gen[i] unmatched
        self.dfs(i + 1, matched, chunks, None);
    }
}

/// Greedy fallback: repeatedly remove the longest common fragment over
/// still-unused positions; each fragment is one chunk. Deterministic
/// (leftmost-longest in gen, then leftmost in ref).
fn greedy_fragment_cover(gen: &[String], rf: &[String]) -> (usize, usize) {
    let mut gen_used = vec![false; gen.len()];
    let mut ref_used = vec![false; rf.len()];
    let mut matches = 0;
    let mut chunks = 0;
    loop {
        let mut best: Option<(usize, usize, usize)> = None; // (len, gi, rj)
        for gi in 0..gen.len() {
            for rj in 0..rf.len() {
                let mut len = 0;
                while gi + len < gen.len()
                    && rj + len < rf.len()
                    && !gen_used[gi + len]
                    && !ref_used[rj + len]
                    && gen[gi + len] == rf[rj + len]
                {
                    len += 1;
                }
                if len > 0 && best.map_or(true, |(bl, _, _)| len > bl) {
                    best = Some((len, gi, rj));
                }
            }
        }
        match best {
            Some((len, gi, rj)) => {
                for k in 0..len {
                    gen_used[gi + k] = true;
                    ref_used[rj + k] = true;
                }
                matches += len;
                chunks += 1;
            }
            None => return (matches, chunks),
        }
    }
}
