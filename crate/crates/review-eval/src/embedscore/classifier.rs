//! Similarity-to-grade classifier: a monotone four-boundary threshold model
//! fit by exhaustive optimal search (dynamic program over candidate cuts),
//! maximizing macro recall with accuracy and then lower boundaries as
//! tie-breakers.

use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::corpus::Grade;

/// Four strictly increasing boundaries partitioning similarity into five
/// grade bins. A boundary value belongs to the higher bin. Boundaries may
/// fall outside [-1, 1] when a fitted bin is empty at the extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeThresholds {
    pub boundaries: [f64; 4],
}

impl GradeThresholds {
    pub fn new(boundaries: [f64; 4]) -> Option<Self> {
        if boundaries.windows(2).all(|w| w[0] < w[1]) {
            Some(GradeThresholds { boundaries })
        } else {
            None
        }
    }
}

/// Grade of the bin containing `similarity`; boundary values belong to the
/// higher bin.
pub fn classify(similarity: f64, thresholds: &GradeThresholds) -> Grade {
    let bin = thresholds
        .boundaries
        .iter()
        .take_while(|b| similarity >= **b)
        .count();
    Grade::new(bin as i64 + 1).expect("bin index in 1..=5")
}

/// Exact-arithmetic objective for one candidate cut tuple, used by both the
/// fitting DP and the brute-force test oracle. Larger is better; ties on the
/// numbers are broken by lower cut positions (handled by callers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Objective {
    /// Macro recall scaled by n_grades * product(supports): integer-exact.
    pub recall: u128,
    /// Number of exactly correct predictions.
    pub correct: u64,
}

pub(crate) struct FitProblem {
    /// Sorted distinct similarity values.
    pub groups: Vec<f64>,
    /// counts[g-1][i] = samples of grade g in group i.
    counts: [Vec<u64>; 5],
    /// Per-grade recall weight: product(supports of present grades) / support_g,
    /// zero for absent grades.
    weights: [u128; 5],
}

impl FitProblem {
    pub fn new(samples: &[(f64, Grade)]) -> Result<Self, EmbedError> {
        if samples.is_empty() {
            return Err(EmbedError::EmptySampleSet);
        }
        let mut groups: Vec<f64> = samples.iter().map(|(s, _)| *s).collect();
        groups.sort_by(|a, b| a.partial_cmp(b).unwrap());
        groups.dedup();
        let mut counts: [Vec<u64>; 5] = std::array::from_fn(|_| vec![0; groups.len()]);
        for (sim, grade) in samples {
            let idx = groups.partition_point(|g| g < sim);
            counts[grade.value() as usize - 1][idx] += 1;
        }
        let supports: [u64; 5] = std::array::from_fn(|g| counts[g].iter().sum());
        let product: u128 = supports.iter().filter(|s| **s > 0).map(|s| *s as u128).product();
        let weights = std::array::from_fn(|g| {
            if supports[g] > 0 {
                product / supports[g] as u128
            } else {
                0
            }
        });
        Ok(FitProblem {
            groups,
            counts,
            weights,
        })
    }

    /// Objective contribution of bin `grade` covering groups lo..hi (0-based,
    /// exclusive hi).
    fn bin_score(&self, grade: usize, lo: usize, hi: usize) -> Objective {
        let correct: u64 = self.counts[grade - 1][lo..hi].iter().sum();
        Objective {
            recall: correct as u128 * self.weights[grade - 1],
            correct,
        }
    }

    /// Converts cut positions into strictly increasing boundary values.
    /// A single interior cut lands on the midpoint between the adjacent
    /// distinct similarities; repeated cuts at one position are spread
    /// upward from it without crossing the next similarity value.
    pub fn boundaries_from_cuts(&self, cuts: [usize; 4]) -> GradeThresholds {
        let m = self.groups.len();
        let mut boundaries = [0.0f64; 4];
        let mut i = 0;
        while i < 4 {
            let p = cuts[i];
            let run = cuts[i..].iter().take_while(|c| **c == p).count();
            if p == 0 {
                // below all data and below the similarity domain
                let hi = self.groups[0].min(-1.0);
                for (j, b) in boundaries[i..i + run].iter_mut().enumerate() {
                    *b = hi - 0.5 * (run - 1 - j) as f64;
                }
            } else if p == m {
                let lo = self.groups[m - 1].max(1.0);
                for (j, b) in boundaries[i..i + run].iter_mut().enumerate() {
                    *b = lo + 0.5 * (j + 1) as f64;
                }
            } else {
                let lower = self.groups[p - 1];
                let upper = self.groups[p];
                let mid = 0.5 * (lower + upper);
                let step = (upper - mid) / run as f64;
                for (j, b) in boundaries[i..i + run].iter_mut().enumerate() {
                    *b = mid + step * j as f64;
                }
            }
            i += run;
        }
        GradeThresholds::new(boundaries).expect("constructed boundaries strictly increase")
    }
}

/// Optimal cut positions via dynamic programming; equivalent to exhaustive
/// enumeration of all non-decreasing 4-tuples over positions 0..=m.
pub(crate) fn fit_cut_positions(problem: &FitProblem) -> [usize; 4] {
    let m = problem.groups.len();
    // prev[p]: best objective over bins 1..=g with the g-th cut at position p,
    // plus the cut prefix achieving it. Seeded with bin 1 = groups 0..q1.
    let mut prev: Vec<Option<(Objective, [usize; 4])>> = vec![None; m + 1];
    for p in 0..=m {
        let score = problem.bin_score(1, 0, p);
        let mut cuts = [0; 4];
        cuts[0] = p;
        prev[p] = Some((score, cuts));
    }
    for grade in 2..=4 {
        let mut next: Vec<Option<(Objective, [usize; 4])>> = vec![None; m + 1];
        for p in 0..=m {
            for p_prev in 0..=p {
                let Some((base, base_cuts)) = prev[p_prev] else {
                    continue;
                };
                let s = problem.bin_score(grade, p_prev, p);
                let cand = Objective {
                    recall: base.recall + s.recall,
                    correct: base.correct + s.correct,
                };
                let mut cand_cuts = base_cuts;
                cand_cuts[grade - 1] = p;
                let better = match &next[p] {
                    None => true,
                    Some((best, best_cuts)) => {
                        cand > *best || (cand == *best && cand_cuts < *best_cuts)
                    }
                };
                if better {
                    next[p] = Some((cand, cand_cuts));
                }
            }
        }
        prev = next;
    }
    let mut best: Option<(Objective, [usize; 4])> = None;
    for p in 0..=m {
        let Some((base, cuts)) = prev[p] else { continue };
        let s = problem.bin_score(5, p, m);
        let cand = Objective {
            recall: base.recall + s.recall,
            correct: base.correct + s.correct,
        };
        let better = match &best {
            None => true,
            Some((b, bc)) => cand > *b || (cand == *b && cuts < *bc),
        };
        if better {
            best = Some((cand, cuts));
        }
    }
    best.expect("at least one cut tuple exists").1
}

/// Fits grade thresholds maximizing macro recall (ties: accuracy, then
/// lower boundaries) over candidate cuts between adjacent distinct
/// similarities.
pub fn fit_grade_classifier(samples: &[(f64, Grade)]) -> Result<GradeThresholds, EmbedError> {
    let problem = FitProblem::new(samples)?;
    let cuts = fit_cut_positions(&problem);
    Ok(problem.boundaries_from_cuts(cuts))
}
