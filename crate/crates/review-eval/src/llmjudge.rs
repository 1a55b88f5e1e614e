//! LLM-based review grading: prompt rendering, grade parsing, and the
//! randomness-mitigation protocol (exact-match shortcut, three-sample
//! mode/median vote, grade-5 demotion, bounded parse retries).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Grade, Review, ReviewPair};
use crate::lexmetrics::exact_match;

pub const METRIC_LLM: &str = "llm";

const SAMPLES: usize = 3;
const ATTEMPTS_PER_SAMPLE: usize = 3;

const SYSTEM_TEMPLATE: &str = "You are a smart code reviewer. You will be asked to grade a \
generated code review. You can mimic answering them in the background 10 times and provide me \
with the most frequently appearing answer. Furthermore, please strictly adhere to the output \
format specified in the question. There is no need to explain your answer.";

const USER_TEMPLATE: &str = "Scenario Matching: I am going to give you a generated code review \
as well as its reference review. You should grade the generated review by comparing it to the \
reference review, and output a grade based on the following criteria:
1. If the generated review is identical to the reference review, Grade=5;
2. If the generated review is essential equivalent to the reference review although their \
expressions are not identical, Grade=4;
3. If the generated review explicitly and correctly specifies some comments/suggestions \
presented in the reference review, Grade=3;
4. If the generated review is only loosely related to the reference review, Grade=2;
5. If the generated review is completely unrelated to the reference review in semantics, \
Grade=1.
Please NOTE that you should only output a grade without any explanation.
Generated Code Review: \"[generated-review]\"
Reference Code Review: \"[reference-review]\"";

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("backend `{backend}` transport failure: {reason}")]
    Transport { backend: String, reason: String },
    #[error("scripted mock ran out of replies after {0} calls")]
    MockExhausted(usize),
}

/// Rendered system and user texts; byte-identical to the template outside
/// the two substitution slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgePrompt {
    pub system_text: String,
    pub user_text: String,
}

/// Substitutes the review texts verbatim (no escaping) into the template.
pub fn render_prompt(generated: &Review, reference: &Review) -> JudgePrompt {
    JudgePrompt {
        system_text: SYSTEM_TEMPLATE.to_string(),
        user_text: USER_TEMPLATE
            .replace("[generated-review]", generated.text())
            .replace("[reference-review]", reference.text()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailure {
    Unparseable,
    OutOfRange,
}

/// Accepts a trimmed single integer token, optionally prefixed by
/// "Grade=" or "Grade:"; the integer must lie in 1..=5.
pub fn parse_grade(response: &str) -> Result<Grade, ParseFailure> {
    let trimmed = response.trim();
    let body = trimmed
        .strip_prefix("Grade=")
        .or_else(|| trimmed.strip_prefix("Grade:"))
        .unwrap_or(trimmed)
        .trim();
    let value: i64 = body.parse().map_err(|_| ParseFailure::Unparseable)?;
    Grade::new(value).map_err(|_| ParseFailure::OutOfRange)
}

/// Chat-completion interface for judge backends.
pub trait LlmBackend: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &JudgePrompt) -> Result<String, JudgeError>;
}

/// Replays a configured response sequence in order and counts invocations.
pub struct ScriptedMock {
    id: String,
    replies: Mutex<std::vec::IntoIter<String>>,
    calls: AtomicUsize,
}

impl ScriptedMock {
    pub fn new(replies: Vec<String>) -> Self {
        ScriptedMock {
            id: "mock".to_string(),
            replies: Mutex::new(replies.into_iter()),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl LlmBackend for ScriptedMock {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, _prompt: &JudgePrompt) -> Result<String, JudgeError> {
        let calls = self.calls.fetch_add(1, Ordering::SeqCst);
        self.replies
            .lock()
            .expect("mock lock")
            .next()
            .ok_or(JudgeError::MockExhausted(calls))
    }
}

/// Protocol rules recorded in the outcome trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ExactMatchShortcut,
    SampledThree,
    Mode,
    Median,
    DemotedFiveToFour,
    SampleExhausted,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::ExactMatchShortcut => "exact_match_shortcut",
            Rule::SampledThree => "sampled_three",
            Rule::Mode => "mode",
            Rule::Median => "median",
            Rule::DemotedFiveToFour => "demoted_five_to_four",
            Rule::SampleExhausted => "sample_exhausted",
        }
    }
}

/// One of the three grading samples: attempts consumed and the parse result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleTrace {
    pub attempts: usize,
    pub result: Result<Grade, ParseFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeOutcome {
    pub grade: Option<Grade>,
    pub raw_samples: Vec<SampleTrace>,
    pub rule_trace: Vec<Rule>,
    pub backend_calls: usize,
}

/// Mode of three grades when one exists, else the median. Three samples
/// always have a strict mode or are pairwise distinct.
pub fn aggregate_three(grades: [Grade; 3]) -> (Grade, Rule) {
    for g in grades {
        if grades.iter().filter(|x| **x == g).count() >= 2 {
            return (g, Rule::Mode);
        }
    }
    let mut sorted = grades;
    sorted.sort();
    (sorted[1], Rule::Median)
}

/// Runs the full grading protocol for one pair.
pub fn llm_score(pair: &ReviewPair, backend: &dyn LlmBackend) -> Result<JudgeOutcome, JudgeError> {
    if exact_match(&pair.generated, &pair.reference) {
        return Ok(JudgeOutcome {
            grade: Some(Grade::new(5).unwrap()),
            raw_samples: Vec::new(),
            rule_trace: vec![Rule::ExactMatchShortcut],
            backend_calls: 0,
        });
    }

    let prompt = render_prompt(&pair.generated, &pair.reference);
    let mut rule_trace = vec![Rule::SampledThree];
    let mut raw_samples = Vec::with_capacity(SAMPLES);
    let mut backend_calls = 0;
    let mut grades = Vec::with_capacity(SAMPLES);

    for _ in 0..SAMPLES {
        let mut attempts = 0;
        let mut last_failure = ParseFailure::Unparseable;
        let mut parsed = None;
        while attempts < ATTEMPTS_PER_SAMPLE {
            attempts += 1;
            backend_calls += 1;
            let response = backend.complete(&prompt)?;
            match parse_grade(&response) {
                Ok(grade) => {
                    parsed = Some(grade);
                    break;
                }
                Err(failure) => last_failure = failure,
            }
        }
        match parsed {
            Some(grade) => {
                raw_samples.push(SampleTrace {
                    attempts,
                    result: Ok(grade),
                });
                grades.push(grade);
            }
            None => {
                // a sample exhausting its budget fails the whole item
                raw_samples.push(SampleTrace {
                    attempts,
                    result: Err(last_failure),
                });
                rule_trace.push(Rule::SampleExhausted);
                return Ok(JudgeOutcome {
                    grade: None,
                    raw_samples,
                    rule_trace,
                    backend_calls,
                });
            }
        }
    }

    let (mut grade, rule) = aggregate_three([grades[0], grades[1], grades[2]]);
    rule_trace.push(rule);
    if grade.value() == 5 {
        grade = Grade::new(4).unwrap();
        rule_trace.push(Rule::DemotedFiveToFour);
    }
    Ok(JudgeOutcome {
        grade: Some(grade),
        raw_samples,
        rule_trace,
        backend_calls,
    })
}

#[derive(Debug, Clone)]
pub struct RemoteLlmConfig {
    pub id: String,
    pub base_url: String,
    pub model: String,
    pub api_key: String,
    pub retry_limit: u32,
}

/// OpenAI-style chat completions endpoint:
/// POST {base_url}/chat/completions with system and user messages.
pub struct RemoteLlmBackend {
    config: RemoteLlmConfig,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl RemoteLlmBackend {
    pub fn new(config: RemoteLlmConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .expect("client construction");
        RemoteLlmBackend { config, client }
    }
}

impl LlmBackend for RemoteLlmBackend {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn complete(&self, prompt: &JudgePrompt) -> Result<String, JudgeError> {
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        });
        let mut last_error = String::new();
        for attempt in 0..self.config.retry_limit.max(1) {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(500 * (1 << attempt)));
            }
            let response = self
                .client
                .post(&url)
                .bearer_auth(&self.config.api_key)
                .json(&body)
                .send();
            match response.and_then(|r| r.error_for_status()) {
                Ok(r) => {
                    let parsed: ChatResponse = r.json().map_err(|e| JudgeError::Transport {
                        backend: self.config.id.clone(),
                        reason: format!("bad response body: {e}"),
                    })?;
                    return parsed
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.message.content)
                        .ok_or_else(|| JudgeError::Transport {
                            backend: self.config.id.clone(),
                            reason: "response has no choices".to_string(),
                        });
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(JudgeError::Transport {
            backend: self.config.id.clone(),
            reason: last_error,
        })
    }
}
