use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use review_eval::config::{BackendKind, RunConfig};
use review_eval::run::{self, RunError};

#[derive(Parser)]
#[command(name = "review-eval", version, about = "Score generated code reviews against references")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Benchmark JSONL path (overrides the config value).
    #[arg(long)]
    benchmark: Option<PathBuf>,
    /// Comma-separated metric list (overrides the config value).
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the embedding cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Backend id to use (overrides the config selection).
    #[arg(long)]
    backend: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Score every benchmark pair and write JSON Lines.
    Score {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip pairs whose ids already appear in the output file.
        #[arg(long)]
        resume: bool,
    },
    /// Build the metric-vs-grade evaluation report.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Calibrate a metric (`bleu` or `embed`).
    Calibrate {
        /// Calibration target.
        metric: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-render tables and CSVs from a saved evaluation report.
    Report {
        /// Path to the report JSON produced by `eval`.
        report: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn build_config(common: &CommonArgs) -> Result<RunConfig, RunError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &common.benchmark {
        config.benchmark = Some(path.clone());
    }
    if !common.metrics.is_empty() {
        config.metrics = common.metrics.clone();
    }
    if let Some(path) = &common.out {
        config.out = Some(path.clone());
    }
    if let Some(path) = &common.cache_dir {
        config.cache_dir = Some(path.clone());
    }
    if let Some(id) = &common.backend {
        match config.backends.iter().find(|b| b.id == *id).map(|b| b.kind) {
            Some(BackendKind::RemoteEmbedding | BackendKind::StubEmbedding) => {
                config.embedding_backend = Some(id.clone());
            }
            Some(BackendKind::RemoteLlm | BackendKind::MockLlm) => {
                config.llm_backend = Some(id.clone());
            }
            None => {
                return Err(RunError::Invalid(format!(
                    "--backend {id} does not match any configured backend"
                )))
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn run() -> Result<ExitCode, RunError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Score { common, resume } => {
            let config = build_config(&common)?;
            let summary = run::cmd_score(&config, resume)?;
            eprintln!(
                "scored {} pairs ({} skipped, {} failed)",
                summary.scored, summary.skipped, summary.failed
            );
            if summary.failed > 0 {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { common } => {
            let config = build_config(&common)?;
            let report = run::cmd_eval(&config)?;
            print!("{}", run::render_correlation_table(&report));
            Ok(ExitCode::SUCCESS)
        }
        Command::Calibrate { metric, common } => {
            let config = build_config(&common)?;
            run::cmd_calibrate(&config, &metric)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { report, common } => {
            let out = common
                .out
                .clone()
                .ok_or_else(|| RunError::Invalid("report needs an output path".to_string()))?;
            let table = run::cmd_report(&report, &out)?;
            print!("{table}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::FAILURE
        }
    }
}
