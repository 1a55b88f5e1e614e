//! Batch orchestration behind the CLI subcommands: scoring a benchmark,
//! building the evaluation report, calibrating BLEU and the grade
//! classifier, and rendering report tables to CSV.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, DEFAULT_LEXICAL_METRICS};
use crate::corpus::{
    self, load_benchmark, record_to_json_value, Benchmark, CorpusError, Grade, GradedRecord,
};
use crate::embedscore::{
    self, classify, fit_grade_classifier, EmbedError, EmbeddingCache,
    GradeThresholds, METRIC_EMBEDDING,
};
use crate::lexmetrics::{
    bleu, exact_match, meteor, rouge, BleuConfig, MetricError, Smoothing, METRIC_BLEU,
    METRIC_EXACT_MATCH, METRIC_METEOR, METRIC_ROUGE1, METRIC_ROUGE_L,
};
use crate::llmjudge::{llm_score, JudgeError, METRIC_LLM};
use crate::metaeval::{
    agreement_report, five_number_summary, grade_medians, ks_statistic, metric_comparison,
    ClassificationReport, FiveNumberSummary, StatsError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Computes every enabled lexical metric for one record in place.
pub fn score_lexical(
    record: &mut GradedRecord,
    metrics: &[String],
    bleu_config: &BleuConfig,
) -> Result<(), MetricError> {
    let generated = corpus::tokenize(record.pair.generated.text());
    let reference = corpus::tokenize(record.pair.reference.text());
    for metric in metrics {
        match metric.as_str() {
            METRIC_EXACT_MATCH => {
                let hit = exact_match(&record.pair.generated, &record.pair.reference);
                record.set_score(METRIC_EXACT_MATCH, if hit { 1.0 } else { 0.0 });
            }
            METRIC_BLEU => {
                record.set_score(METRIC_BLEU, bleu(&generated, &reference, bleu_config)?);
            }
            METRIC_ROUGE1 | METRIC_ROUGE_L => {
                let scores = rouge(&generated, &reference)?;
                if metric == METRIC_ROUGE1 {
                    record.set_score(METRIC_ROUGE1, scores.rouge1_f);
                } else {
                    record.set_score(METRIC_ROUGE_L, scores.rouge_l_f);
                }
            }
            METRIC_METEOR => {
                record.set_score(METRIC_METEOR, meteor(&generated, &reference)?);
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ScoreSummary {
    pub scored: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Serialize)]
struct LlmOutcomeWire {
    grade: Option<u8>,
    rule_trace: Vec<&'static str>,
    backend_calls: usize,
}

/// Scores every pair with the enabled metrics and writes JSON Lines
/// incrementally. Per-pair LLM failures are recorded without aborting the
/// batch. Returns counts; callers map `failed > 0` to the partial-failure
/// exit status.
pub fn cmd_score(config: &RunConfig, resume: bool) -> Result<ScoreSummary, RunError> {
    let benchmark_path = config
        .benchmark
        .as_ref()
        .ok_or_else(|| RunError::Invalid("score needs a benchmark path".to_string()))?;
    let out_path = config
        .out
        .as_ref()
        .ok_or_else(|| RunError::Invalid("score needs an output path".to_string()))?;
    let benchmark = load_benchmark(benchmark_path)?;
    let metrics = effective_metrics(config);

    let existing_ids = if resume && out_path.exists() {
        read_output_ids(out_path)?
    } else {
        HashSet::new()
    };

    let mut embed = if metrics.iter().any(|m| m == METRIC_EMBEDDING) {
        let backend = config.build_embedding_backend()?;
        let cache = open_cache(config)?;
        Some((backend, cache))
    } else {
        None
    };
    let llm_backend = if metrics.iter().any(|m| m == METRIC_LLM) {
        Some(config.build_llm_backend()?)
    } else {
        None
    };

    // warm the cache for all pending texts in one batched pass
    if let Some((backend, cache)) = &mut embed {
        let texts: Vec<&str> = benchmark
            .records
            .iter()
            .filter(|r| !existing_ids.contains(&r.pair.id))
            .flat_map(|r| [r.pair.generated.text(), r.pair.reference.text()])
            .collect();
        embedscore::embed_cached(&texts, backend.as_ref(), cache)?;
    }

    let file = if resume && out_path.exists() {
        std::fs::OpenOptions::new()
            .append(true)
            .open(out_path)
            .map_err(io_err(out_path))?
    } else {
        File::create(out_path).map_err(io_err(out_path))?
    };
    let mut writer = BufWriter::new(file);

    let mut summary = ScoreSummary::default();
    for record in &benchmark.records {
        if existing_ids.contains(&record.pair.id) {
            summary.skipped += 1;
            continue;
        }
        let mut record = record.clone();
        score_lexical(&mut record, &metrics, &config.bleu)?;
        if let Some((backend, cache)) = &mut embed {
            let sim = embedscore::embed_and_score(&record.pair, backend.as_ref(), cache)?;
            record.set_score(METRIC_EMBEDDING, sim);
        }
        let mut llm_wire = None;
        if let Some(backend) = &llm_backend {
            let outcome = llm_score(&record.pair, backend.as_ref())?;
            match outcome.grade {
                Some(grade) => record.set_score(METRIC_LLM, grade.value() as f64),
                None => summary.failed += 1,
            }
            llm_wire = Some(LlmOutcomeWire {
                grade: outcome.grade.map(|g| g.value()),
                rule_trace: outcome.rule_trace.iter().map(|r| r.as_str()).collect(),
                backend_calls: outcome.backend_calls,
            });
        }
        let mut value = record_to_json_value(&record);
        if let Some(wire) = llm_wire {
            value
                .as_object_mut()
                .expect("record value is an object")
                .insert("llm".to_string(), serde_json::to_value(wire).unwrap());
        }
        let line = serde_json::to_string(&value).expect("score line serializes");
        writer
            .write_all(line.as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .map_err(io_err(out_path))?;
        summary.scored += 1;
    }
    writer.flush().map_err(io_err(out_path))?;
    Ok(summary)
}

fn effective_metrics(config: &RunConfig) -> Vec<String> {
    if config.metrics.is_empty() {
        DEFAULT_LEXICAL_METRICS
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        config.metrics.clone()
    }
}

fn read_output_ids(path: &Path) -> Result<HashSet<String>, RunError> {
    #[derive(Deserialize)]
    struct IdOnly {
        id: String,
    }
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut ids = HashSet::new();
    for line in reader.lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(parsed) = serde_json::from_str::<IdOnly>(&line) {
            ids.insert(parsed.id);
        }
    }
    Ok(ids)
}

fn open_cache(config: &RunConfig) -> Result<EmbeddingCache, RunError> {
    match &config.cache_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            Ok(EmbeddingCache::open(dir.join("embeddings.jsonl"))?)
        }
        None => Ok(EmbeddingCache::in_memory()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub metric: String,
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradeDistribution {
    pub count: usize,
    pub summary: FiveNumberSummary,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsEntry {
    pub grade_a: u8,
    pub grade_b: u8,
    pub d: f64,
}

/// Full evaluation report: the correlation table, per-grade score
/// distributions, the pairwise K-S matrix, and agreement reports for
/// grade-valued metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_graded: usize,
    pub correlations: Vec<CorrelationRow>,
    pub medians: BTreeMap<String, BTreeMap<u8, f64>>,
    pub distributions: BTreeMap<String, BTreeMap<u8, GradeDistribution>>,
    pub ks: BTreeMap<String, Vec<KsEntry>>,
    pub agreement: BTreeMap<String, ClassificationReport>,
}

/// Builds the report for the named metrics over all graded records.
pub fn build_report(benchmark: &Benchmark, metrics: &[String]) -> Result<EvalReport, RunError> {
    let graded: Vec<&GradedRecord> = benchmark
        .records
        .iter()
        .filter(|r| r.human_grade.is_some())
        .collect();
    if graded.is_empty() {
        return Err(StatsError::NoGradedRecords.into());
    }

    // a metric that is constant over the graded set has no rank
    // correlation; leave it out of the table rather than failing the run
    let mut correlations = Vec::new();
    for metric in metrics {
        match metric_comparison(benchmark, std::slice::from_ref(metric)) {
            Ok(rows) => {
                correlations.extend(rows.into_iter().map(|(metric, r)| CorrelationRow {
                    metric,
                    rho: r.rho,
                    p_value: r.p_value,
                    n: r.n,
                }));
            }
            Err(StatsError::ConstantSeries) => {}
            Err(e) => return Err(e.into()),
        }
    }
    correlations.sort_by(|a, b| b.rho.partial_cmp(&a.rho).unwrap());

    let mut medians = BTreeMap::new();
    let mut distributions = BTreeMap::new();
    let mut ks = BTreeMap::new();
    let mut agreement = BTreeMap::new();

    for metric in metrics {
        medians.insert(metric.clone(), grade_medians(benchmark, metric)?);

        let mut by_grade: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
        for record in &graded {
            let grade = record.human_grade.unwrap().value();
            let score = record
                .score(metric)
                .ok_or_else(|| StatsError::MissingMetric(metric.clone()))?;
            by_grade.entry(grade).or_default().push(score);
        }
        let dist: BTreeMap<u8, GradeDistribution> = by_grade
            .iter()
            .map(|(grade, scores)| {
                (
                    *grade,
                    GradeDistribution {
                        count: scores.len(),
                        summary: five_number_summary(scores).expect("non-empty"),
                        scores: scores.clone(),
                    },
                )
            })
            .collect();

        let mut entries = Vec::new();
        let grades: Vec<u8> = by_grade.keys().copied().collect();
        for (i, a) in grades.iter().enumerate() {
            for b in &grades[i + 1..] {
                let r = ks_statistic(&by_grade[a], &by_grade[b])?;
                entries.push(KsEntry {
                    grade_a: *a,
                    grade_b: *b,
                    d: r.d_statistic,
                });
            }
        }
        ks.insert(metric.clone(), entries);
        distributions.insert(metric.clone(), dist);

        // agreement report only for metrics already on the grade scale
        let as_grades: Option<Vec<Grade>> = graded
            .iter()
            .map(|r| {
                let s = r.score(metric).unwrap();
                if s.fract() == 0.0 && (1.0..=5.0).contains(&s) {
                    Some(Grade::new(s as i64).unwrap())
                } else {
                    None
                }
            })
            .collect();
        if let Some(predicted) = as_grades {
            let truth: Vec<Grade> = graded.iter().map(|r| r.human_grade.unwrap()).collect();
            agreement.insert(metric.clone(), agreement_report(&predicted, &truth)?);
        }
    }

    Ok(EvalReport {
        n_graded: graded.len(),
        correlations,
        medians,
        distributions,
        ks,
        agreement,
    })
}

/// Loads the graded benchmark, computes any missing enabled metrics, and
/// emits the report JSON plus the flat CSV exports.
pub fn cmd_eval(config: &RunConfig) -> Result<EvalReport, RunError> {
    let benchmark_path = config
        .benchmark
        .as_ref()
        .ok_or_else(|| RunError::Invalid("eval needs a benchmark path".to_string()))?;
    let out_path = config
        .out
        .as_ref()
        .ok_or_else(|| RunError::Invalid("eval needs an output path".to_string()))?;
    let mut benchmark = load_benchmark(benchmark_path)?;
    let metrics = effective_metrics(config);

    ensure_scored(&mut benchmark, &metrics, config)?;

    let report = build_report(&benchmark, &metrics)?;
    write_report(&report, out_path)?;
    Ok(report)
}

/// Fills in missing metric scores on graded records so `eval` can run on a
/// raw benchmark.
fn ensure_scored(
    benchmark: &mut Benchmark,
    metrics: &[String],
    config: &RunConfig,
) -> Result<(), RunError> {
    let lexical: Vec<String> = metrics
        .iter()
        .filter(|m| DEFAULT_LEXICAL_METRICS.contains(&m.as_str()))
        .cloned()
        .collect();
    let need_embedding = metrics.iter().any(|m| m == METRIC_EMBEDDING)
        && benchmark
            .records
            .iter()
            .any(|r| r.human_grade.is_some() && r.score(METRIC_EMBEDDING).is_none());
    let need_llm = metrics.iter().any(|m| m == METRIC_LLM)
        && benchmark
            .records
            .iter()
            .any(|r| r.human_grade.is_some() && r.score(METRIC_LLM).is_none());

    let mut embed = if need_embedding {
        Some((config.build_embedding_backend()?, open_cache(config)?))
    } else {
        None
    };
    let llm_backend = if need_llm {
        Some(config.build_llm_backend()?)
    } else {
        None
    };

    for record in &mut benchmark.records {
        if record.human_grade.is_none() {
            continue;
        }
        let missing_lexical: Vec<String> = lexical
            .iter()
            .filter(|m| record.score(m).is_none())
            .cloned()
            .collect();
        if !missing_lexical.is_empty() {
            score_lexical(record, &missing_lexical, &config.bleu)?;
        }
        if let Some((backend, cache)) = &mut embed {
            if record.score(METRIC_EMBEDDING).is_none() {
                let sim = embedscore::embed_and_score(&record.pair, backend.as_ref(), cache)?;
                record.set_score(METRIC_EMBEDDING, sim);
            }
        }
        if let Some(backend) = &llm_backend {
            if record.score(METRIC_LLM).is_none() {
                let outcome = llm_score(&record.pair, backend.as_ref())?;
                if let Some(grade) = outcome.grade {
                    record.set_score(METRIC_LLM, grade.value() as f64);
                }
            }
        }
    }
    Ok(())
}

/// Writes the report JSON and its CSV exports next to it.
pub fn write_report(report: &EvalReport, out_path: &Path) -> Result<(), RunError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(out_path, json + "\n").map_err(io_err(out_path))?;
    write_report_csvs(report, out_path)
}

fn csv_path(out_path: &Path, suffix: &str) -> PathBuf {
    let stem = out_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "report".to_string());
    out_path.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn write_report_csvs(report: &EvalReport, out_path: &Path) -> Result<(), RunError> {
    let mut correlations = String::from("metric,rho,p_value,n\n");
    for row in &report.correlations {
        correlations.push_str(&format!(
            "{},{},{},{}\n",
            row.metric, row.rho, row.p_value, row.n
        ));
    }
    let path = csv_path(out_path, "correlations");
    std::fs::write(&path, correlations).map_err(io_err(&path))?;

    let mut medians = String::from("metric,grade,median\n");
    for (metric, per_grade) in &report.medians {
        for (grade, value) in per_grade {
            medians.push_str(&format!("{metric},{grade},{value}\n"));
        }
    }
    let path = csv_path(out_path, "medians");
    std::fs::write(&path, medians).map_err(io_err(&path))?;

    let mut dist = String::from("metric,grade,count,min,q1,median,q3,max\n");
    for (metric, per_grade) in &report.distributions {
        for (grade, d) in per_grade {
            let s = d.summary;
            dist.push_str(&format!(
                "{metric},{grade},{},{},{},{},{},{}\n",
                d.count, s.min, s.q1, s.median, s.q3, s.max
            ));
        }
    }
    let path = csv_path(out_path, "distributions");
    std::fs::write(&path, dist).map_err(io_err(&path))?;

    let mut ks = String::from("metric,grade_a,grade_b,d\n");
    for (metric, entries) in &report.ks {
        for e in entries {
            ks.push_str(&format!("{metric},{},{},{}\n", e.grade_a, e.grade_b, e.d));
        }
    }
    let path = csv_path(out_path, "ks");
    std::fs::write(&path, ks).map_err(io_err(&path))?;

    for (metric, agreement) in &report.agreement {
        let mut confusion = String::from("truth\\predicted,1,2,3,4,5\n");
        for (i, row) in agreement.confusion.iter().enumerate() {
            confusion.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                row[0],
                row[1],
                row[2],
                row[3],
                row[4]
            ));
        }
        let path = csv_path(out_path, &format!("confusion_{metric}"));
        std::fs::write(&path, confusion).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Plain-text rendering of the correlation table for terminal output.
pub fn render_correlation_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>8} {:>12} {:>8}\n",
        "metric", "rho", "p_value", "n"
    ));
    for row in &report.correlations {
        out.push_str(&format!(
            "{:<24} {:>8.4} {:>12.3e} {:>8}\n",
            row.metric, row.rho, row.p_value, row.n
        ));
    }
    out
}

/// The three reference review pairs used to pin the BLEU configuration,
/// with their published target scores.
pub const BLEU_CALIBRATION_PAIRS: [(&str, &str, f64); 3] = [
    ("Unnecessary call to super", "We don't need super here", 17.53),
    (
        "why do you want to whitelist it at the end?",
        "why waste time whitelisting it?",
        12.88,
    ),
    ("stringbuilder?", "swallow?", 70.71),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BleuCandidate {
    pub config: BleuConfig,
    pub scores: [f64; 3],
    pub l1_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BleuCalibration {
    pub candidates: Vec<BleuCandidate>,
    pub pinned: BleuConfig,
    pub pinned_scores: [f64; 3],
    pub targets: [f64; 3],
    pub residuals: [f64; 3],
}

/// Grid search over smoothing x max_n against the reference triplet;
/// the argmin-L1 candidate becomes the pinned config.
pub fn calibrate_bleu() -> BleuCalibration {
    let methods = [
        Smoothing::None,
        Smoothing::AddOne,
        Smoothing::ExponentialDecay,
        Smoothing::FloorEpsilon,
    ];
    let mut candidates = Vec::with_capacity(16);
    for smoothing in methods {
        for max_n in 1..=4 {
            let config = BleuConfig {
                max_n,
                smoothing,
                epsilon: 0.1,
            };
            let mut scores = [0.0f64; 3];
            let mut residual = 0.0;
            for (i, (generated, reference, target)) in BLEU_CALIBRATION_PAIRS.iter().enumerate() {
                let score = bleu(
                    &corpus::tokenize(generated),
                    &corpus::tokenize(reference),
                    &config,
                )
                .expect("calibration pairs are non-empty");
                scores[i] = score;
                residual += (score - target).abs();
            }
            candidates.push(BleuCandidate {
                config,
                scores,
                l1_residual: residual,
            });
        }
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.l1_residual.partial_cmp(&b.l1_residual).unwrap())
        .expect("grid is non-empty")
        .clone();
    let residuals = std::array::from_fn(|i| best.scores[i] - BLEU_CALIBRATION_PAIRS[i].2);
    BleuCalibration {
        candidates,
        pinned: best.config,
        pinned_scores: best.scores,
        targets: std::array::from_fn(|i| BLEU_CALIBRATION_PAIRS[i].2),
        residuals,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierCalibration {
    pub thresholds: GradeThresholds,
    pub n_samples: usize,
    pub training_accuracy: f64,
    pub training_macro_recall: f64,
    /// Thresholds were fit and evaluated on the same sample set.
    pub in_sample: bool,
}

/// Fits grade thresholds on (similarity, grade) samples and reports the
/// in-sample quality of the fit.
pub fn calibrate_classifier(
    samples: &[(f64, Grade)],
) -> Result<ClassifierCalibration, RunError> {
    let thresholds = fit_grade_classifier(samples)?;
    let predicted: Vec<Grade> = samples.iter().map(|(s, _)| classify(*s, &thresholds)).collect();
    let truth: Vec<Grade> = samples.iter().map(|(_, g)| *g).collect();
    let report = agreement_report(&predicted, &truth)?;
    Ok(ClassifierCalibration {
        thresholds,
        n_samples: samples.len(),
        training_accuracy: report.accuracy,
        training_macro_recall: report.macro_recall,
        in_sample: true,
    })
}

/// CLI entry for `calibrate`: `bleu` runs the grid against the reference
/// triplet; `embed` fits thresholds on the graded benchmark's embedding
/// similarities. The result is persisted as JSON at the output path.
pub fn cmd_calibrate(config: &RunConfig, metric: &str) -> Result<(), RunError> {
    let out_path = config
        .out
        .as_ref()
        .ok_or_else(|| RunError::Invalid("calibrate needs an output path".to_string()))?;
    match metric {
        "bleu" => {
            let calibration = calibrate_bleu();
            let json = serde_json::to_string_pretty(&calibration).expect("serializes");
            std::fs::write(out_path, json + "\n").map_err(io_err(out_path))?;
            Ok(())
        }
        "embed" | "embedding" => {
            let benchmark_path = config.benchmark.as_ref().ok_or_else(|| {
                RunError::Invalid("embed calibration needs a graded benchmark".to_string())
            })?;
            let mut benchmark = load_benchmark(benchmark_path)?;
            let metrics = vec![METRIC_EMBEDDING.to_string()];
            ensure_scored(&mut benchmark, &metrics, config)?;
            let samples: Vec<(f64, Grade)> = benchmark
                .records
                .iter()
                .filter_map(|r| {
                    let grade = r.human_grade?;
                    let sim = r.score(METRIC_EMBEDDING)?;
                    Some((sim, grade))
                })
                .collect();
            if samples.is_empty() {
                return Err(StatsError::NoGradedRecords.into());
            }
            let calibration = calibrate_classifier(&samples)?;
            let json = serde_json::to_string_pretty(&calibration).expect("serializes");
            std::fs::write(out_path, json + "\n").map_err(io_err(out_path))?;
            Ok(())
        }
        other => Err(RunError::Invalid(format!(
            "unknown calibration target `{other}` (expected `bleu` or `embed`)"
        ))),
    }
}

/// Loads a persisted classifier calibration.
pub fn load_classifier_calibration(path: &Path) -> Result<ClassifierCalibration, RunError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| RunError::Invalid(format!("bad calibration: {e}")))
}

/// CLI entry for `report`: re-renders CSVs and the correlation table from
/// a persisted report JSON.
pub fn cmd_report(report_path: &Path, out_path: &Path) -> Result<String, RunError> {
    let text = std::fs::read_to_string(report_path).map_err(io_err(report_path))?;
    let report: EvalReport = serde_json::from_str(&text)
        .map_err(|e| RunError::Invalid(format!("bad report json: {e}")))?;
    write_report_csvs(&report, out_path)?;
    Ok(render_correlation_table(&report))
}
