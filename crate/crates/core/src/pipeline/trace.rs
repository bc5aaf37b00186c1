use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::Prompt;
use crate::sim::SimTime;
use crate::sva::{Assertion, AssertionSuite, Origin};
use crate::triage::{LogMessage, TriageVerdict};

pub const TRACE_FILE: &str = "trace.json";
pub const TIMING_FILE: &str = "timing.json";
pub const FINAL_FILE: &str = "final.sva";
pub const OUTCOME_FILE: &str = "outcome.json";
pub const WORKSPACES_DIR: &str = "workspaces";

pub const EXHAUSTED_ADVICE: &str = "examine design implementation and restart";
pub const BUG_ADVICE: &str = "manual inspection of design implementation for bug";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("I/O failure on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed {path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

/// Which check produced an iteration's verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// The response could not be split into assertions.
    Extraction,
    /// The built-in parser found syntax errors; nothing was simulated.
    Local,
    Simulator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub origin: Origin,
    pub source_text: String,
}

pub fn snapshot(suite: &AssertionSuite) -> Vec<SuiteEntry> {
    suite
        .assertions
        .iter()
        .map(|a| SuiteEntry {
            name: a.name.clone(),
            origin: a.origin,
            source_text: a.source_text.clone(),
        })
        .collect()
}

pub fn restore(design_name: &str, entries: &[SuiteEntry]) -> AssertionSuite {
    AssertionSuite {
        design_name: design_name.to_owned(),
        assertions: entries
            .iter()
            .map(|e| Assertion::from_source(&e.source_text, e.origin, &e.name))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatRetry {
    pub problem: String,
    pub prompt: Prompt,
    pub response: String,
}

/// One check of one suite. Record `n` holds the prompt whose response
/// produced the suite (generation for 0, repair `n` otherwise).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: u32,
    pub gate: Gate,
    pub suite: Vec<SuiteEntry>,
    pub verdict: TriageVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<Prompt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format_retry: Option<FormatRetry>,
    /// Assertions dropped by the merge that produced this suite.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub retired: Vec<String>,
    /// Assertions sent back for repair after this check.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failing: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workspace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_time: Option<SimTime>,
}

/// A provider or simulator failure that ended the run early.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halt {
    pub n: u32,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub design_name: String,
    pub max_iterations: u32,
    /// Answered prompts in the conversation: the generation plus each repair.
    pub prompt_count: u32,
    /// Every provider call, format retries included.
    pub provider_calls: u32,
    pub records: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halt: Option<Halt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTiming {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_latency_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format_retry_latency_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation_wall_ms: Option<f64>,
    pub wall_ms: f64,
}

/// Wall-clock measurements, kept apart from the deterministic trace.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generation_latency_ms: f64,
    pub total_wall_ms: f64,
    pub records: Vec<RecordTiming>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    ImplementationBugSuspected,
    Exhausted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::ImplementationBugSuspected => 2,
            Status::Exhausted => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub status: Status,
    pub design_name: String,
    pub final_assertions: usize,
    pub prompt_count: u32,
    pub provider_calls: u32,
    pub iterations: usize,
    pub baseline_assertion_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advice: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<LogMessage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("trace types serialize");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<(), TraceError> {
    fs::write(path, text).map_err(|e| TraceError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, TraceError> {
    let text = fs::read_to_string(path).map_err(|e| TraceError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| TraceError::Malformed {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Writes `trace.json`, `timing.json`, `final.sva` and `outcome.json`.
/// Workspaces are already in `output_dir/workspaces`. Returns `output_dir`.
pub fn persist_trace(
    trace: &Trace,
    timing: &Timing,
    outcome: &OutcomeSummary,
    final_suite: &AssertionSuite,
    output_dir: &Path,
) -> Result<PathBuf, TraceError> {
    fs::create_dir_all(output_dir).map_err(|e| TraceError::Io {
        path: output_dir.to_owned(),
        message: e.to_string(),
    })?;
    write(&output_dir.join(TRACE_FILE), &to_json(trace))?;
    write(&output_dir.join(TIMING_FILE), &to_json(timing))?;
    write(&output_dir.join(OUTCOME_FILE), &to_json(outcome))?;
    write(&output_dir.join(FINAL_FILE), &final_suite.to_sva())?;
    Ok(output_dir.to_owned())
}

/// A persisted run, as read back by the report.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactBundle {
    pub trace: Trace,
    pub timing: Timing,
    pub outcome: OutcomeSummary,
    pub final_sva: String,
}

impl ArtifactBundle {
    pub fn load(dir: &Path) -> Result<Self, TraceError> {
        let final_path = dir.join(FINAL_FILE);
        Ok(ArtifactBundle {
            trace: read_json(&dir.join(TRACE_FILE))?,
            timing: read_json(&dir.join(TIMING_FILE))?,
            outcome: read_json(&dir.join(OUTCOME_FILE))?,
            final_sva: fs::read_to_string(&final_path).map_err(|e| TraceError::Io {
                path: final_path,
                message: e.to_string(),
            })?,
        })
    }
}
