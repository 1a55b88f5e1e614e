//! CLI contract tests: exit codes and resume behavior.

use std::path::Path;
use std::process::Command;

fn write_benchmark(path: &Path, n: usize) {
    let mut lines = String::new();
    for i in 0..n {
        lines.push_str(&format!(
            "{}\n",
            serde_json::json!({
                "id": format!("p{i}"),
                "generated": format!("generated review {i}"),
                "reference": format!("reference review {i}"),
                "code_before": null,
                "code_after": null,
                "generator": null,
                "human_grade": (i % 5) + 1,
                "scores": null,
            })
        ));
    }
    std::fs::write(path, lines).unwrap();
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_review-eval"))
}

#[test]
fn missing_config_exits_1() {
    let output = bin()
        .args(["score", "--config", "/nonexistent/config.toml", "--out", "/tmp/x.jsonl"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn malformed_benchmark_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bad.jsonl");
    std::fs::write(&bench, "not json\n").unwrap();
    let output = bin()
        .args([
            "score",
            "--benchmark",
            bench.to_str().unwrap(),
            "--out",
            dir.path().join("out.jsonl").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 1"), "diagnostic names the line: {stderr}");
}

#[test]
fn per_pair_llm_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    write_benchmark(&bench, 2);
    // first pair parses on its first sample of each round; the second
    // pair's replies never parse, exhausting its attempt budget
    let config = format!(
        r#"
benchmark = "{}"
metrics = ["bleu", "llm"]

[[backends]]
id = "mock"
kind = "mock_llm"
replies = ["3", "3", "3", "bad", "bad", "bad"]
"#,
        bench.display()
    );
    let config_path = dir.path().join("run.toml");
    std::fs::write(&config_path, config).unwrap();
    let out = dir.path().join("scores.jsonl");
    let output = bin()
        .args([
            "score",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", String::from_utf8_lossy(&output.stderr));
    // both pairs still produced output lines
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written.lines().count(), 2);
    assert!(written.contains("sample_exhausted"));
}

#[test]
fn resume_skips_already_scored_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    write_benchmark(&bench, 4);
    let out = dir.path().join("scores.jsonl");

    let full = bin()
        .args([
            "score",
            "--benchmark",
            bench.to_str().unwrap(),
            "--metrics",
            "bleu,rouge1",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(full.status.code(), Some(0));
    let lines: Vec<String> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| l.to_string())
        .collect();
    assert_eq!(lines.len(), 4);

    // keep only the first two lines, then resume
    std::fs::write(&out, format!("{}\n{}\n", lines[0], lines[1])).unwrap();
    let resumed = bin()
        .args([
            "score",
            "--benchmark",
            bench.to_str().unwrap(),
            "--metrics",
            "bleu,rouge1",
            "--out",
            out.to_str().unwrap(),
            "--resume",
        ])
        .output()
        .unwrap();
    assert_eq!(resumed.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&resumed.stderr);
    assert!(stderr.contains("2 skipped"), "{stderr}");
    let after: Vec<String> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| l.to_string())
        .collect();
    assert_eq!(after, lines, "resume must reproduce the interrupted run");
}

#[test]
fn report_rerenders_eval_output() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    write_benchmark(&bench, 10);
    let report = dir.path().join("report.json");
    let eval = bin()
        .args([
            "eval",
            "--benchmark",
            bench.to_str().unwrap(),
            "--metrics",
            "bleu,rougeL",
            "--out",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(eval.status.code(), Some(0), "{}", String::from_utf8_lossy(&eval.stderr));
    let first_csv = std::fs::read(dir.path().join("report_correlations.csv")).unwrap();

    let rerender_out = dir.path().join("again.json");
    let rerender = bin()
        .args([
            "report",
            report.to_str().unwrap(),
            "--out",
            rerender_out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(rerender.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&rerender.stdout);
    assert!(stdout.contains("metric"), "{stdout}");
    let second_csv = std::fs::read(dir.path().join("again_correlations.csv")).unwrap();
    assert_eq!(first_csv, second_csv);
}
