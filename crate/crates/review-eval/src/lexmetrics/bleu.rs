//! BLEU with configurable zero-precision smoothing.
//!
//! score = 100 * BP * exp((1/max_n) * sum ln p_n), where p_n are clipped
//! modified n-gram precisions for n = 1..min(max_n, |generated|). Orders
//! longer than the generated sequence contribute nothing to the sum (their
//! factor is 1); the divisor stays max_n. This reading reproduces the
//! calibration targets for two of the three reference pairs exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::corpus::TokenSequence;

/// How zero clipped-precision orders are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// Any zero precision yields a score of 0.
    None,
    /// Zero precision becomes 1/(total + 1).
    AddOne,
    /// The k-th zero-precision order becomes 1/2^k.
    ExponentialDecay,
    /// Zero precision becomes epsilon/total.
    FloorEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_n: usize,
    pub smoothing: Smoothing,
    pub epsilon: f64,
}

impl Default for BleuConfig {
    /// The pinned configuration selected by calibration against the
    /// reference score triplet (see `calibrate_bleu`).
    fn default() -> Self {
        BleuConfig {
            max_n: 4,
            smoothing: Smoothing::AddOne,
            epsilon: 0.1,
        }
    }
}

impl BleuConfig {
    fn validate(&self) -> Result<(), MetricError> {
        if !(1..=4).contains(&self.max_n) {
            return Err(MetricError::InvalidConfig(format!(
                "max_n must be in 1..=4, got {}",
                self.max_n
            )));
        }
        if self.epsilon <= 0.0 {
            return Err(MetricError::InvalidConfig("epsilon must be > 0".into()));
        }
        Ok(())
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// BLEU in [0, 100]. Empty generated sequence scores 0; empty reference
/// is an error.
pub fn bleu(
    generated: &TokenSequence,
    reference: &TokenSequence,
    config: &BleuConfig,
) -> Result<f64, MetricError> {
    config.validate()?;
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    if generated.is_empty() {
        return Ok(0.0);
    }

    let gen_len = generated.len() as f64;
    let ref_len = reference.len() as f64;
    let brevity_penalty = (1.0 - ref_len / gen_len).exp().min(1.0);

    let mut log_sum = 0.0;
    let mut zero_orders = 0u32;
    for n in 1..=config.max_n.min(generated.len()) {
        let gen_counts = ngram_counts(&generated.tokens, n);
        let ref_counts = ngram_counts(&reference.tokens, n);
        let total: usize = generated.len() - n + 1;
        let clipped: usize = gen_counts
            .iter()
            .map(|(gram, count)| (*count).min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let precision = if clipped > 0 {
            clipped as f64 / total as f64
        } else {
            zero_orders += 1;
            match config.smoothing {
                Smoothing::None => return Ok(0.0),
                Smoothing::AddOne => 1.0 / (total as f64 + 1.0),
                Smoothing::ExponentialDecay => 1.0 / f64::powi(2.0, zero_orders as i32),
                Smoothing::FloorEpsilon => config.epsilon / total as f64,
            }
        };
        log_sum += precision.ln();
    }

    let geo_mean = (log_sum / config.max_n as f64).exp();
    Ok(100.0 * brevity_penalty * geo_mean)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use proptest::prelude::*;

    /// Independent brute-force oracle: enumerates n-grams with explicit
    /// nested loops and Vec scans instead of hash-map windows.
    pub(crate) fn bleu_oracle(gen: &[String], rf: &[String], config: &BleuConfig) -> f64 {
        assert!(!rf.is_empty());
        if gen.is_empty() {
            return 0.0;
        }
        let bp = f64::min(1.0, (1.0 - rf.len() as f64 / gen.len() as f64).exp());
        let mut log_sum = 0.0;
        let mut zeros = 0;
        for n in 1..=config.max_n.min(gen.len()) {
            let gen_grams: Vec<&[String]> = (0..=gen.len() - n).map(|i| &gen[i..i + n]).collect();
            let ref_grams: Vec<&[String]> = if rf.len() >= n {
                (0..=rf.len() - n).map(|i| &rf[i..i + n]).collect()
            } else {
                Vec::new()
            };
            // clipped count: for each distinct gen gram, min(count_gen, count_ref)
            let mut seen: Vec<&[String]> = Vec::new();
            let mut clipped = 0usize;
            for gram in &gen_grams {
                if seen.contains(gram) {
                    continue;
                }
                seen.push(gram);
                let cg = gen_grams.iter().filter(|g| *g == gram).count();
                let cr = ref_grams.iter().filter(|g| *g == gram).count();
                clipped += cg.min(cr);
            }
            let total = gen_grams.len() as f64;
            let p = if clipped > 0 {
                clipped as f64 / total
            } else {
                zeros += 1;
                match config.smoothing {
                    Smoothing::None => return 0.0,
                    Smoothing::AddOne => 1.0 / (total + 1.0),
                    Smoothing::ExponentialDecay => 0.5f64.powi(zeros),
                    Smoothing::FloorEpsilon => config.epsilon / total,
                }
            };
            log_sum += p.ln();
        }
        100.0 * bp * (log_sum / config.max_n as f64).exp()
    }

    fn seq(text: &str) -> TokenSequence {
        tokenize(text)
    }

    #[test]
    fn identical_sequences_score_100() {
        let s = seq("we need super here");
        for smoothing in [
            Smoothing::None,
            Smoothing::AddOne,
            Smoothing::ExponentialDecay,
            Smoothing::FloorEpsilon,
        ] {
            let config = BleuConfig {
                max_n: 4,
                smoothing,
                epsilon: 0.1,
            };
            assert_eq!(bleu(&s, &s, &config).unwrap(), 100.0);
        }
    }

    #[test]
    fn disjoint_add_one_hand_value() {
        // |gen| = |ref| = 4, fully disjoint, add-one counts 1/5 * 1/4 * 1/3 * 1/2
        let gen = seq("a b c d");
        let rf = seq("e f g h");
        let expected = 100.0 * (1.0f64 / 120.0).powf(0.25);
        let got = bleu(&gen, &rf, &BleuConfig::default()).unwrap();
        assert!((got - expected).abs() < 1e-9, "got {got}");
        assert!((got - 30.21).abs() < 0.01);
    }

    #[test]
    fn calibration_targets_under_pinned_config() {
        let config = BleuConfig::default();
        let two_token = bleu(&seq("stringbuilder?"), &seq("swallow?"), &config).unwrap();
        assert!((two_token - 70.71).abs() < 0.01, "got {two_token}");
        let whitelist = bleu(
            &seq("why do you want to whitelist it at the end?"),
            &seq("why waste time whitelisting it?"),
            &config,
        )
        .unwrap();
        assert!((whitelist - 12.88).abs() < 0.01, "got {whitelist}");
    }

    #[test]
    fn empty_inputs() {
        let s = seq("a b");
        let empty = TokenSequence { tokens: vec![] };
        assert_eq!(bleu(&empty, &s, &BleuConfig::default()).unwrap(), 0.0);
        assert_eq!(
            bleu(&s, &empty, &BleuConfig::default()),
            Err(MetricError::EmptyReference)
        );
    }

    #[test]
    fn invalid_config_rejected() {
        let s = seq("a b");
        let bad = BleuConfig {
            max_n: 0,
            ..BleuConfig::default()
        };
        assert!(bleu(&s, &s, &bad).is_err());
        let bad = BleuConfig {
            epsilon: 0.0,
            ..BleuConfig::default()
        };
        assert!(bleu(&s, &s, &bad).is_err());
    }

    fn arb_tokens(max_len: usize) -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec("[a-e]{1,2}", 0..=max_len)
    }

    fn arb_smoothing() -> impl Strategy<Value = Smoothing> {
        prop_oneof![
            Just(Smoothing::None),
            Just(Smoothing::AddOne),
            Just(Smoothing::ExponentialDecay),
            Just(Smoothing::FloorEpsilon),
        ]
    }

    proptest! {
        #[test]
        fn matches_oracle(gen in arb_tokens(8), rf in arb_tokens(8), smoothing in arb_smoothing(), max_n in 1usize..=4) {
            prop_assume!(!rf.is_empty());
            let config = BleuConfig { max_n, smoothing, epsilon: 0.1 };
            let got = bleu(
                &TokenSequence { tokens: gen.clone() },
                &TokenSequence { tokens: rf.clone() },
                &config,
            ).unwrap();
            let expected = bleu_oracle(&gen, &rf, &config);
            prop_assert!((got - expected).abs() < 1e-9);
            prop_assert!((0.0..=100.0 + 1e-9).contains(&got));
        }

        #[test]
        fn invariant_under_vocabulary_renaming(gen in arb_tokens(8), rf in arb_tokens(8), smoothing in arb_smoothing()) {
            prop_assume!(!rf.is_empty());
            let config = BleuConfig { max_n: 4, smoothing, epsilon: 0.1 };
            let rename = |t: &String| format!("tok_{t}_x");
            let base = bleu(
                &TokenSequence { tokens: gen.clone() },
                &TokenSequence { tokens: rf.clone() },
                &config,
            ).unwrap();
            let renamed = bleu(
                &TokenSequence { tokens: gen.iter().map(rename).collect() },
                &TokenSequence { tokens: rf.iter().map(rename).collect() },
                &config,
            ).unwrap();
            prop_assert!((base - renamed).abs() < 1e-12);
        }
    }
}
