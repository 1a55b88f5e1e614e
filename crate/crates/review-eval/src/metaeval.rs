//! Statistical harness comparing metric scores against human grades:
//! Spearman rank correlation, two-sample K-S statistic, Fleiss' kappa,
//! per-grade medians, agreement/classification reports, and the
//! correlation comparison table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::corpus::{Benchmark, Grade};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("series is constant; rank correlation undefined")]
    ConstantSeries,
    #[error("empty sample")]
    EmptySample,
    #[error("row {row} sums to {got}, expected n_raters = {expected}")]
    RowSumViolation {
        row: usize,
        got: u64,
        expected: u64,
    },
    #[error("expected agreement is 1; kappa undefined")]
    DegenerateAgreement,
    #[error("metric `{0}` missing from one or more graded records")]
    MissingMetric(String),
    #[error("benchmark has no graded records")]
    NoGradedRecords,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub n_a: usize,
    pub n_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub n_items: usize,
    pub n_raters: u64,
    pub n_categories: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Indexed by grade 1..=5 (index 0 = grade 1).
    pub per_class: [ClassMetrics; 5],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// confusion[truth-1][predicted-1]
    pub confusion: [[u64; 5]; 5],
    pub total: u64,
}

/// Average ranks (1-based) with ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| values[*a].partial_cmp(&values[*b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x) * (x - mean_x);
        var_y += (y - mean_y) * (y - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Tie-corrected Spearman rank correlation with a two-sided t-approximation
/// p-value.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewObservations {
            needed: 3,
            got: xs.len(),
        });
    }
    let rho = pearson(&average_ranks(xs), &average_ranks(ys))?.clamp(-1.0, 1.0);
    let n = xs.len();
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * ((n as f64 - 2.0) / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n as f64 - 2.0).expect("valid dof");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok(CorrelationResult { rho, p_value, n })
}

/// Two-sample Kolmogorov-Smirnov statistic, computed exactly over the
/// merged sample points.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut merged: Vec<f64> = a.iter().chain(b).copied().collect();
    merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
    merged.dedup();
    let ecdf = |sample: &[f64], x: f64| {
        sample.iter().filter(|v| **v <= x).count() as f64 / sample.len() as f64
    };
    let d = merged
        .iter()
        .map(|x| (ecdf(a, *x) - ecdf(b, *x)).abs())
        .fold(0.0f64, f64::max);
    Ok(KsResult {
        d_statistic: d,
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// Fleiss' kappa over an items x categories count matrix.
pub fn fleiss_kappa(ratings: &[Vec<u64>], n_raters: u64) -> Result<KappaResult, StatsError> {
    if ratings.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if n_raters < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: n_raters as usize,
        });
    }
    let n_categories = ratings[0].len();
    for (row_idx, row) in ratings.iter().enumerate() {
        let sum: u64 = row.iter().sum();
        if sum != n_raters || row.len() != n_categories {
            return Err(StatsError::RowSumViolation {
                row: row_idx,
                got: sum,
                expected: n_raters,
            });
        }
    }
    let n_items = ratings.len() as f64;
    let n = n_raters as f64;
    let p_bar: f64 = ratings
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|c| (*c as f64) * (*c as f64)).sum();
            (sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / n_items;
    let p_e: f64 = (0..n_categories)
        .map(|j| {
            let col: f64 = ratings.iter().map(|row| row[j] as f64).sum();
            let share = col / (n_items * n);
            share * share
        })
        .sum();
    if p_e >= 1.0 {
        return Err(StatsError::DegenerateAgreement);
    }
    Ok(KappaResult {
        kappa: (p_bar - p_e) / (1.0 - p_e),
        n_items: ratings.len(),
        n_raters,
        n_categories,
    })
}

/// Per-grade median of one metric's scores (average-of-middle-two for even
/// counts); grades with zero support are omitted.
pub fn grade_medians(
    benchmark: &Benchmark,
    metric: &str,
) -> Result<BTreeMap<u8, f64>, StatsError> {
    let mut by_grade: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
    let mut any = false;
    for record in &benchmark.records {
        let Some(grade) = record.human_grade else {
            continue;
        };
        any = true;
        let score = record
            .score(metric)
            .ok_or_else(|| StatsError::MissingMetric(metric.to_string()))?;
        by_grade.entry(grade.value()).or_default().push(score);
    }
    if !any {
        return Err(StatsError::NoGradedRecords);
    }
    Ok(by_grade
        .into_iter()
        .map(|(grade, scores)| (grade, median(scores)))
        .collect())
}

pub fn median(mut scores: Vec<f64>) -> f64 {
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = scores.len();
    if n % 2 == 1 {
        scores[n / 2]
    } else {
        (scores[n / 2 - 1] + scores[n / 2]) / 2.0
    }
}

/// Five-number summary (min, q1, median, q3, max) of one score series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number_summary(scores: &[f64]) -> Option<FiveNumberSummary> {
    if scores.is_empty() {
        return None;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| {
        // linear interpolation between closest ranks
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    };
    Some(FiveNumberSummary {
        min: sorted[0],
        q1: quantile(0.25),
        median: quantile(0.5),
        q3: quantile(0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Confusion-matrix classification report; macro averages exclude
/// zero-support classes.
pub fn agreement_report(
    predicted: &[Grade],
    truth: &[Grade],
) -> Result<ClassificationReport, StatsError> {
    if predicted.len() != truth.len() {
        return Err(StatsError::LengthMismatch(predicted.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut confusion = [[0u64; 5]; 5];
    for (p, t) in predicted.iter().zip(truth) {
        confusion[t.value() as usize - 1][p.value() as usize - 1] += 1;
    }
    let total = truth.len() as u64;
    let mut per_class = [ClassMetrics::default(); 5];
    let mut macro_precision = 0.0;
    let mut macro_recall = 0.0;
    let mut macro_f1 = 0.0;
    let mut supported = 0u32;
    let mut trace = 0u64;
    for c in 0..5 {
        let support: u64 = confusion[c].iter().sum();
        let predicted_as: u64 = (0..5).map(|t| confusion[t][c]).sum();
        let tp = confusion[c][c];
        trace += tp;
        let precision = if predicted_as > 0 {
            tp as f64 / predicted_as as f64
        } else {
            0.0
        };
        let recall = if support > 0 {
            tp as f64 / support as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class[c] = ClassMetrics {
            precision,
            recall,
            f1,
            support,
        };
        if support > 0 {
            supported += 1;
            macro_precision += precision;
            macro_recall += recall;
            macro_f1 += f1;
        }
    }
    let k = supported as f64;
    Ok(ClassificationReport {
        per_class,
        macro_precision: macro_precision / k,
        macro_recall: macro_recall / k,
        macro_f1: macro_f1 / k,
        accuracy: trace as f64 / total as f64,
        confusion,
        total,
    })
}

/// One Spearman row per metric against human grades, sorted by descending
/// rho (the canonical correlation table).
pub fn metric_comparison(
    benchmark: &Benchmark,
    metrics: &[String],
) -> Result<Vec<(String, CorrelationResult)>, StatsError> {
    let graded: Vec<_> = benchmark
        .records
        .iter()
        .filter(|r| r.human_grade.is_some())
        .collect();
    if graded.is_empty() {
        return Err(StatsError::NoGradedRecords);
    }
    let grades: Vec<f64> = graded
        .iter()
        .map(|r| r.human_grade.unwrap().value() as f64)
        .collect();
    let mut rows = Vec::with_capacity(metrics.len());
    for metric in metrics {
        let scores: Vec<f64> = graded
            .iter()
            .map(|r| {
                r.score(metric)
                    .ok_or_else(|| StatsError::MissingMetric(metric.clone()))
            })
            .collect::<Result<_, _>>()?;
        rows.push((metric.clone(), spearman(&scores, &grades)?));
    }
    rows.sort_by(|a, b| b.1.rho.partial_cmp(&a.1.rho).unwrap());
    Ok(rows)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force Spearman oracle: explicit rank assignment plus the
    /// direct Pearson formula, with an exact permutation p-value for
    /// small n.
    pub(crate) fn spearman_oracle(xs: &[f64], ys: &[f64]) -> f64 {
        fn ranks(values: &[f64]) -> Vec<f64> {
            values
                .iter()
                .map(|v| {
                    let less = values.iter().filter(|w| *w < v).count() as f64;
                    let equal = values.iter().filter(|w| *w == v).count() as f64;
                    less + (equal + 1.0) / 2.0
                })
                .collect()
        }
        let rx = ranks(xs);
        let ry = ranks(ys);
        let n = rx.len() as f64;
        let sum_x: f64 = rx.iter().sum();
        let sum_y: f64 = ry.iter().sum();
        let sum_xy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
        let sum_x2: f64 = rx.iter().map(|a| a * a).sum();
        let sum_y2: f64 = ry.iter().map(|a| a * a).sum();
        let num = n * sum_xy - sum_x * sum_y;
        let den = ((n * sum_x2 - sum_x * sum_x) * (n * sum_y2 - sum_y * sum_y)).sqrt();
        num / den
    }

    /// Brute-force K-S oracle: evaluate both ECDFs at every merged point
    /// without dedup or shortcuts.
    pub(crate) fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
        let mut d: f64 = 0.0;
        for x in a.iter().chain(b) {
            let fa = a.iter().filter(|v| **v <= *x).count() as f64 / a.len() as f64;
            let fb = b.iter().filter(|v| **v <= *x).count() as f64 / b.len() as f64;
            d = d.max((fa - fb).abs());
        }
        d
    }

    /// Direct-formula Fleiss kappa oracle.
    pub(crate) fn fleiss_oracle(ratings: &[Vec<u64>], n_raters: u64) -> f64 {
        let n = n_raters as f64;
        let n_items = ratings.len() as f64;
        let n_cat = ratings[0].len();
        let mut p_sum = 0.0;
        for row in ratings {
            let mut s = 0.0;
            for c in row {
                s += (*c as f64).powi(2);
            }
            p_sum += (s - n) / (n * (n - 1.0));
        }
        let p_bar = p_sum / n_items;
        let mut p_e = 0.0;
        for j in 0..n_cat {
            let mut col = 0.0;
            for row in ratings {
                col += row[j] as f64;
            }
            p_e += (col / (n_items * n)).powi(2);
        }
        (p_bar - p_e) / (1.0 - p_e)
    }

    fn grade(v: i64) -> Grade {
        Grade::new(v).unwrap()
    }

    #[test]
    fn spearman_hand_values() {
        let r = spearman(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-12);
        assert!(r.p_value < 1e-6);
        let r = spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((r.rho + 1.0).abs() < 1e-12);
        let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.rho - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::LengthMismatch(2, 3))
        );
        assert_eq!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantSeries)
        );
        assert!(matches!(
            spearman(&[1.0, 2.0], &[2.0, 1.0]),
            Err(StatsError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn ks_hand_values() {
        let r = ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.d_statistic, 0.0);
        let r = ks_statistic(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.d_statistic, 1.0);
        let r = ks_statistic(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((r.d_statistic - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ks_statistic(&[], &[1.0]), Err(StatsError::EmptySample));
    }

    #[test]
    fn fleiss_hand_values() {
        // unanimous agreement across mixed categories
        let unanimous = vec![vec![3, 0], vec![0, 3], vec![3, 0]];
        let r = fleiss_kappa(&unanimous, 3).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-12);

        let mixed = vec![vec![2, 1], vec![1, 2]];
        let r = fleiss_kappa(&mixed, 3).unwrap();
        assert!((r.kappa - (-1.0 / 3.0)).abs() < 1e-12);

        // degenerate: everything in one category
        let degenerate = vec![vec![3, 0], vec![3, 0]];
        assert_eq!(
            fleiss_kappa(&degenerate, 3),
            Err(StatsError::DegenerateAgreement)
        );

        let bad = vec![vec![2, 2]];
        assert!(matches!(
            fleiss_kappa(&bad, 3),
            Err(StatsError::RowSumViolation { row: 0, got: 4, .. })
        ));
    }

    #[test]
    fn median_rules() {
        assert_eq!(median(vec![1.0, 2.0, 3.0, 4.0]), 2.5);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn agreement_hand_values() {
        let truth = vec![grade(1), grade(1), grade(2)];
        let predicted = vec![grade(1), grade(2), grade(2)];
        let report = agreement_report(&predicted, &truth).unwrap();
        assert!((report.accuracy - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(report.per_class[0].precision, 1.0);
        assert_eq!(report.per_class[0].recall, 0.5);
        assert_eq!(report.per_class[1].precision, 0.5);
        assert_eq!(report.per_class[1].recall, 1.0);
        // zero-support classes excluded from macro averages
        assert!((report.macro_recall - 0.75).abs() < 1e-15);

        let perfect = agreement_report(&truth, &truth).unwrap();
        assert_eq!(perfect.accuracy, 1.0);
        assert!((perfect.macro_f1 - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn spearman_matches_oracle(
            pairs in proptest::collection::vec((0i32..8, 0i32..8), 3..=20)
        ) {
            let xs: Vec<f64> = pairs.iter().map(|(x, _)| *x as f64).collect();
            let ys: Vec<f64> = pairs.iter().map(|(_, y)| *y as f64).collect();
            match spearman(&xs, &ys) {
                Ok(r) => {
                    let expected = spearman_oracle(&xs, &ys);
                    prop_assert!((r.rho - expected).abs() < 1e-12);
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&r.p_value));
                    let sym = spearman(&ys, &xs).unwrap();
                    prop_assert!((r.rho - sym.rho).abs() < 1e-12);
                    // invariance under a strictly increasing transform
                    let tx: Vec<f64> = xs.iter().map(|x| x.exp() + 2.0 * x).collect();
                    let t = spearman(&tx, &ys).unwrap();
                    prop_assert!((r.rho - t.rho).abs() < 1e-12);
                }
                Err(StatsError::ConstantSeries) => {
                    let cx = xs.iter().all(|x| *x == xs[0]);
                    let cy = ys.iter().all(|y| *y == ys[0]);
                    prop_assert!(cx || cy);
                }
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }

        #[test]
        fn ks_matches_oracle(
            a in proptest::collection::vec(0i32..10, 1..=30),
            b in proptest::collection::vec(0i32..10, 1..=30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let r = ks_statistic(&a, &b).unwrap();
            prop_assert_eq!(r.d_statistic, ks_oracle(&a, &b));
            let sym = ks_statistic(&b, &a).unwrap();
            prop_assert_eq!(r.d_statistic, sym.d_statistic);
            prop_assert!((0.0..=1.0).contains(&r.d_statistic));
            prop_assert_eq!(ks_statistic(&a, &a).unwrap().d_statistic, 0.0);
        }

        #[test]
        fn fleiss_matches_oracle(
            rows in proptest::collection::vec(
                proptest::collection::vec(0u64..=4, 5),
                1..=5
            )
        ) {
            // rescale rows so each sums to a fixed rater count
            let n_raters = 4u64;
            let ratings: Vec<Vec<u64>> = rows.iter().map(|row| {
                let mut out = vec![0u64; 5];
                let mut remaining = n_raters;
                for (i, c) in row.iter().enumerate() {
                    let take = (*c).min(remaining);
                    out[i] = take;
                    remaining -= take;
                }
                out[4] += remaining;
                out
            }).collect();
            match fleiss_kappa(&ratings, n_raters) {
                Ok(r) => {
                    prop_assert!((r.kappa - fleiss_oracle(&ratings, n_raters)).abs() < 1e-12);
                    prop_assert!(r.kappa <= 1.0 + 1e-12);
                }
                Err(StatsError::DegenerateAgreement) => {}
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }

        #[test]
        fn agreement_trace_identity(
            pairs in proptest::collection::vec((1i64..=5, 1i64..=5), 1..=40)
        ) {
            let truth: Vec<Grade> = pairs.iter().map(|(t, _)| grade(*t)).collect();
            let predicted: Vec<Grade> = pairs.iter().map(|(_, p)| grade(*p)).collect();
            let report = agreement_report(&predicted, &truth).unwrap();
            let trace: u64 = (0..5).map(|i| report.confusion[i][i]).sum();
            prop_assert!((report.accuracy - trace as f64 / report.total as f64).abs() < 1e-15);
            for c in 0..5 {
                let row_sum: u64 = report.confusion[c].iter().sum();
                prop_assert_eq!(row_sum, report.per_class[c].support);
            }
            let supported: Vec<f64> = (0..5)
                .filter(|c| report.per_class[*c].support > 0)
                .map(|c| report.per_class[c].f1)
                .collect();
            let mean = supported.iter().sum::<f64>() / supported.len() as f64;
            prop_assert!((report.macro_f1 - mean).abs() < 1e-12);
        }
    }
}
