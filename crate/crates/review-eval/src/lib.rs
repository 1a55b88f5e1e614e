//! Scoring machine-generated code reviews against human references:
//! lexical overlap metrics, embedding similarity with grade thresholds,
//! an LLM grading protocol, and the statistics used to compare metrics
//! against human grades.

pub mod config;
pub mod corpus;
pub mod embedscore;
pub mod lexmetrics;
pub mod llmjudge;
pub mod metaeval;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use corpus::{load_benchmark, save_benchmark, Benchmark, Grade, GradedRecord, ReviewPair};
pub use run::{build_report, calibrate_bleu, cmd_eval, cmd_score, EvalReport};
