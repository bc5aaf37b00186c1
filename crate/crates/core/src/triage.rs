//! Rule-driven simulation log parsing and four-way outcome classification.
//!
//! A [`PatternPack`] translates one simulator's log dialect into categorized
//! [`LogMessage`]s; [`classify`] then applies a strict precedence: syntax
//! errors, then timing / missing-signal failures, then testcase failures.

use std::fmt;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Harness-injected line introducing each simulator phase's output.
pub const PHASE_MARKER: &str = "### PHASE: ";

#[derive(Debug, Error)]
pub enum TriageError {
    #[error("malformed pattern pack: {0}")]
    MalformedPack(String),
    #[error("cannot render feedback for a NoError verdict")]
    InvalidVerdict,
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Compile,
    Run,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
    Fatal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Syntax,
    Timing,
    MissingSignal,
    AssertionFailure,
    TestcaseFailure,
    Tool,
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Syntax => "syntax",
            Category::Timing => "timing",
            Category::MissingSignal => "missing_signal",
            Category::AssertionFailure => "assertion_failure",
            Category::TestcaseFailure => "testcase_failure",
            Category::Tool => "tool",
            Category::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
}

/// One structured element of a parsed log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogMessage {
    pub phase: Phase,
    pub severity: Severity,
    pub category: Category,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assertion_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl LogMessage {
    pub fn new(phase: Phase, severity: Severity, category: Category, text: impl Into<String>) -> Self {
        LogMessage {
            phase,
            severity,
            category,
            text: text.into(),
            signal: None,
            assertion_name: None,
            location: None,
        }
    }

    fn is_error(&self) -> bool {
        self.severity >= Severity::Error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimFailureKind {
    Timing,
    MissingSignal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TriageVerdict {
    NoError,
    SyntaxError { messages: Vec<LogMessage> },
    SimulationFailure { kind: SimFailureKind, messages: Vec<LogMessage> },
    TestcaseFailure { messages: Vec<LogMessage> },
}

impl TriageVerdict {
    pub fn messages(&self) -> &[LogMessage] {
        match self {
            TriageVerdict::NoError => &[],
            TriageVerdict::SyntaxError { messages }
            | TriageVerdict::SimulationFailure { messages, .. }
            | TriageVerdict::TestcaseFailure { messages } => messages,
        }
    }

    /// Syntax and simulation failures are fed back to the model; the other two end the loop.
    pub fn is_repairable(&self) -> bool {
        matches!(
            self,
            TriageVerdict::SyntaxError { .. } | TriageVerdict::SimulationFailure { .. }
        )
    }

    pub fn label(&self) -> String {
        match self {
            TriageVerdict::NoError => "NoError".into(),
            TriageVerdict::SyntaxError { .. } => "SyntaxError".into(),
            TriageVerdict::SimulationFailure { kind, .. } => format!(
                "SimulationFailure({})",
                match kind {
                    SimFailureKind::Timing => "timing",
                    SimFailureKind::MissingSignal => "missing_signal",
                }
            ),
            TriageVerdict::TestcaseFailure { .. } => "TestcaseFailure".into(),
        }
    }

    /// Distinct assertion names cited by the verdict's messages, in first-seen order.
    pub fn assertion_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for name in self.messages().iter().filter_map(|m| m.assertion_name.as_deref()) {
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }
}

/// One-line summary, e.g. `SimulationFailure(missing_signal): rst_ni`.
impl fmt::Display for TriageVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())?;
        if matches!(self, TriageVerdict::NoError) {
            return Ok(());
        }
        let mut subjects: Vec<&str> = Vec::new();
        if let TriageVerdict::SimulationFailure { kind: SimFailureKind::MissingSignal, messages } = self {
            for s in messages.iter().filter_map(|m| m.signal.as_deref()) {
                if !subjects.contains(&s) {
                    subjects.push(s);
                }
            }
        }
        if subjects.is_empty() {
            subjects = self.assertion_names();
        }
        if subjects.is_empty() {
            let n = self.messages().len();
            write!(f, ": {n} message{}", if n == 1 { "" } else { "s" })
        } else {
            write!(f, ": {}", subjects.join(", "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseFilter {
    #[default]
    Any,
    Compile,
    Run,
}

impl PhaseFilter {
    fn admits(self, phase: Phase) -> bool {
        match self {
            PhaseFilter::Any => true,
            PhaseFilter::Compile => phase == Phase::Compile,
            PhaseFilter::Run => phase == Phase::Run,
        }
    }
}

/// Which named regex groups feed which message fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assertion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    pattern: String,
    #[serde(default)]
    phase: PhaseFilter,
    severity: Severity,
    category: Category,
    #[serde(default)]
    captures: CaptureMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PackFile {
    name: String,
    rules: Vec<RuleFile>,
    sim_time_pattern: String,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub pattern: Regex,
    pub phase: PhaseFilter,
    pub severity: Severity,
    pub category: Category,
    pub captures: CaptureMap,
}

/// Ordered match rules for one simulator's log dialect (`.pack.json`).
#[derive(Debug, Clone)]
pub struct PatternPack {
    pub name: String,
    pub rules: Vec<Rule>,
    /// Must define `value` and `unit` groups.
    pub sim_time_pattern: Regex,
}

fn compile(pattern: &str, what: &str) -> Result<Regex, TriageError> {
    Regex::new(pattern).map_err(|e| TriageError::MalformedPack(format!("{what}: {e}")))
}

fn has_group(re: &Regex, name: &str) -> bool {
    re.capture_names().flatten().any(|n| n == name)
}

impl PatternPack {
    pub fn from_json(text: &str) -> Result<Self, TriageError> {
        let file: PackFile =
            serde_json::from_str(text).map_err(|e| TriageError::MalformedPack(e.to_string()))?;
        let mut rules = Vec::with_capacity(file.rules.len());
        for (i, r) in file.rules.into_iter().enumerate() {
            let pattern = compile(&r.pattern, &format!("rule {i}"))?;
            for group in [&r.captures.signal, &r.captures.assertion, &r.captures.file, &r.captures.line]
                .into_iter()
                .flatten()
            {
                if !has_group(&pattern, group) {
                    return Err(TriageError::MalformedPack(format!(
                        "rule {i}: capture map names group '{group}' which the pattern does not define"
                    )));
                }
            }
            if r.category == Category::MissingSignal && r.captures.signal.is_none() {
                return Err(TriageError::MalformedPack(format!(
                    "rule {i}: missing_signal rules must capture the signal"
                )));
            }
            rules.push(Rule {
                pattern,
                phase: r.phase,
                severity: r.severity,
                category: r.category,
                captures: r.captures,
            });
        }
        let sim_time_pattern = compile(&file.sim_time_pattern, "sim_time_pattern")?;
        for g in ["value", "unit"] {
            if !has_group(&sim_time_pattern, g) {
                return Err(TriageError::MalformedPack(format!("sim_time_pattern lacks group '{g}'")));
            }
        }
        Ok(PatternPack {
            name: file.name,
            rules,
            sim_time_pattern,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TriageError> {
        let text = std::fs::read_to_string(path).map_err(|e| TriageError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        PatternPack::from_json(&text)
    }
}

/// Scans the log line by line; the first matching rule wins. Unmatched lines
/// mentioning "error" (any case) become `other`/`error`; the rest are dropped.
pub fn parse_log(raw_text: &str, pack: &PatternPack) -> Vec<LogMessage> {
    let mut phase = Phase::Run;
    let mut out = Vec::new();
    for line in raw_text.lines() {
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix(PHASE_MARKER) {
            match rest.trim() {
                "compile" => phase = Phase::Compile,
                "run" => phase = Phase::Run,
                _ => {}
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let matched = pack
            .rules
            .iter()
            .filter(|r| r.phase.admits(phase))
            .find_map(|r| r.pattern.captures(line).map(|c| (r, c)));
        if let Some((rule, caps)) = matched {
            let group = |name: &Option<String>| {
                name.as_deref()
                    .and_then(|n| caps.name(n))
                    .map(|m| m.as_str().to_owned())
            };
            let mut msg = LogMessage::new(phase, rule.severity, rule.category, line);
            msg.signal = group(&rule.captures.signal);
            msg.assertion_name = group(&rule.captures.assertion);
            if let (Some(file), Some(l)) = (group(&rule.captures.file), group(&rule.captures.line)) {
                if let Ok(l) = l.parse() {
                    msg.location = Some(Location { file, line: l });
                }
            }
            if msg.category == Category::MissingSignal && msg.signal.is_none() {
                msg.category = Category::Other;
            }
            out.push(msg);
        } else if line.to_ascii_lowercase().contains("error") {
            out.push(LogMessage::new(phase, Severity::Error, Category::Other, line));
        }
    }
    out
}

/// Applies the outcome precedence: syntax errors, then timing or missing
/// signal, then assertion/testcase failures (or a failing exit status), then
/// no error.
pub fn classify(messages: &[LogMessage], exit_code: i32) -> TriageVerdict {
    let syntax: Vec<LogMessage> = messages
        .iter()
        .filter(|m| m.category == Category::Syntax && m.is_error())
        .cloned()
        .collect();
    if !syntax.is_empty() {
        return TriageVerdict::SyntaxError { messages: syntax };
    }

    let sim: Vec<LogMessage> = messages
        .iter()
        .filter(|m| matches!(m.category, Category::Timing | Category::MissingSignal))
        .cloned()
        .collect();
    if let Some(first) = sim.first() {
        let kind = if first.category == Category::Timing {
            SimFailureKind::Timing
        } else {
            SimFailureKind::MissingSignal
        };
        return TriageVerdict::SimulationFailure { kind, messages: sim };
    }

    let mut failures: Vec<LogMessage> = messages
        .iter()
        .filter(|m| {
            matches!(m.category, Category::AssertionFailure | Category::TestcaseFailure)
                || (exit_code != 0 && matches!(m.category, Category::Other | Category::Tool) && m.is_error())
        })
        .cloned()
        .collect();
    if failures.is_empty() && exit_code != 0 {
        failures.push(LogMessage::new(
            Phase::Run,
            Severity::Error,
            Category::Tool,
            format!("simulator exited with status {exit_code} without reporting an error"),
        ));
    }
    if !failures.is_empty() {
        return TriageVerdict::TestcaseFailure { messages: failures };
    }
    TriageVerdict::NoError
}

/// Renders up to `max_lines` messages, earliest first, one per line, with a
/// `…N more` marker when truncated.
pub fn feedback_excerpt(verdict: &TriageVerdict, max_lines: usize) -> Result<String, TriageError> {
    if matches!(verdict, TriageVerdict::NoError) {
        return Err(TriageError::InvalidVerdict);
    }
    let messages = verdict.messages();
    let shown = max_lines.max(1).min(messages.len());
    let mut lines: Vec<String> = messages[..shown].iter().map(|m| m.text.clone()).collect();
    if messages.len() > shown {
        lines.push(format!("…{} more", messages.len() - shown));
    }
    Ok(lines.join("\n"))
}
