//! ROUGE-1 (clipped unigram F1) and ROUGE-L (LCS F1).

use std::collections::HashMap;

use super::MetricError;
use crate::corpus::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScores {
    pub rouge1_f: f64,
    pub rouge_l_f: f64,
}

fn f1(overlap: f64, gen_len: f64, ref_len: f64) -> f64 {
    if overlap == 0.0 {
        return 0.0;
    }
    let precision = overlap / gen_len;
    let recall = overlap / ref_len;
    2.0 * precision * recall / (precision + recall)
}

fn lcs_length(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for ai in a {
        for (j, bj) in b.iter().enumerate() {
            curr[j + 1] = if ai == bj {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Both sequences must be non-empty; the error names the empty side.
pub fn rouge(
    generated: &TokenSequence,
    reference: &TokenSequence,
) -> Result<RougeScores, MetricError> {
    if generated.is_empty() {
        return Err(MetricError::EmptyGenerated);
    }
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }

    let mut ref_counts: HashMap<&String, usize> = HashMap::new();
    for tok in &reference.tokens {
        *ref_counts.entry(tok).or_insert(0) += 1;
    }
    let mut overlap = 0usize;
    for tok in &generated.tokens {
        if let Some(count) = ref_counts.get_mut(tok) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }

    let gen_len = generated.len() as f64;
    let ref_len = reference.len() as f64;
    let lcs = lcs_length(&generated.tokens, &reference.tokens);

    Ok(RougeScores {
        rouge1_f: f1(overlap as f64, gen_len, ref_len),
        rouge_l_f: f1(lcs as f64, gen_len, ref_len),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use proptest::prelude::*;

    /// Brute-force oracle: clipped counts by vector scans and a recursive LCS.
    pub(crate) fn rouge_oracle(gen: &[String], rf: &[String]) -> (f64, f64) {
        fn lcs_rec(a: &[String], b: &[String]) -> usize {
            match (a.split_last(), b.split_last()) {
                (Some((xa, ra)), Some((xb, rb))) => {
                    if xa == xb {
                        lcs_rec(ra, rb) + 1
                    } else {
                        lcs_rec(ra, b).max(lcs_rec(a, rb))
                    }
                }
                _ => 0,
            }
        }
        let mut overlap = 0usize;
        let mut seen: Vec<&String> = Vec::new();
        for tok in gen {
            if seen.contains(&tok) {
                continue;
            }
            seen.push(tok);
            let cg = gen.iter().filter(|t| *t == tok).count();
            let cr = rf.iter().filter(|t| *t == tok).count();
            overlap += cg.min(cr);
        }
        let f = |ov: usize| {
            if ov == 0 {
                0.0
            } else {
                let p = ov as f64 / gen.len() as f64;
                let r = ov as f64 / rf.len() as f64;
                2.0 * p * r / (p + r)
            }
        };
        (f(overlap), f(lcs_rec(gen, rf)))
    }

    #[test]
    fn rouge_examples() {
        let s = tokenize("a b c");
        let scores = rouge(&s, &s).unwrap();
        assert_eq!(scores.rouge1_f, 1.0);
        assert_eq!(scores.rouge_l_f, 1.0);

        let scores = rouge(&tokenize("stringbuilder?"), &tokenize("swallow?")).unwrap();
        assert_eq!(scores.rouge1_f, 0.5);
        assert_eq!(scores.rouge_l_f, 0.5);

        let scores = rouge(&tokenize("a b"), &tokenize("c d")).unwrap();
        assert_eq!(scores.rouge1_f, 0.0);
        assert_eq!(scores.rouge_l_f, 0.0);
    }

    #[test]
    fn empty_sides_are_named() {
        let s = tokenize("a");
        let empty = TokenSequence { tokens: vec![] };
        assert_eq!(rouge(&empty, &s), Err(MetricError::EmptyGenerated));
        assert_eq!(rouge(&s, &empty), Err(MetricError::EmptyReference));
    }

    proptest! {
        #[test]
        fn matches_oracle(
            gen in proptest::collection::vec("[a-d]", 1..=10),
            rf in proptest::collection::vec("[a-d]", 1..=10),
        ) {
            let got = rouge(
                &TokenSequence { tokens: gen.clone() },
                &TokenSequence { tokens: rf.clone() },
            ).unwrap();
            let (r1, rl) = rouge_oracle(&gen, &rf);
            prop_assert!((got.rouge1_f - r1).abs() < 1e-12);
            prop_assert!((got.rouge_l_f - rl).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&got.rouge1_f));
            prop_assert!((0.0..=1.0).contains(&got.rouge_l_f));
        }
    }
}
