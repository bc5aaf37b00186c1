use std::fs;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec_format::{serialize_spec, FormattedSpec};
use crate::sva::AssertionSuite;
use crate::triage::{feedback_excerpt, TriageVerdict};

/// Placeholders a prompt template may use.
pub const PLACEHOLDERS: [&str; 4] = ["spec", "requirements", "failing_assertions", "feedback"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("template {template} uses unknown placeholder '{{{{{name}}}}}'")]
    UnknownPlaceholder { template: String, name: String },
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
    #[error("repair prompts need a syntax error or simulation failure, got {0}")]
    InvalidFeedbackKind(String),
    #[error("history iteration {found} does not follow {expected}")]
    HistoryGap { expected: u32, found: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Generate,
    Repair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system_preamble: String,
    pub user_message: String,
    pub purpose: Purpose,
    pub iteration: u32,
}

fn placeholder_re() -> Regex {
    Regex::new(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}").expect("static regex")
}

/// The four prompt texts. Unknown placeholders are rejected when a set is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub system: String,
    pub generate: String,
    pub repair: String,
    pub format_repair: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            system: include_str!("../../prompts/system.txt").to_owned(),
            generate: include_str!("../../prompts/generate.txt").to_owned(),
            repair: include_str!("../../prompts/repair.txt").to_owned(),
            format_repair: include_str!("../../prompts/format_repair.txt").to_owned(),
        }
    }
}

impl PromptTemplates {
    pub fn new(system: String, generate: String, repair: String, format_repair: String) -> Result<Self, PromptError> {
        let t = PromptTemplates {
            system,
            generate,
            repair,
            format_repair,
        };
        t.check()?;
        Ok(t)
    }

    /// Reads `system.txt`, `generate.txt`, `repair.txt` and `format_repair.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| PromptError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        };
        Self::new(
            read("system.txt")?,
            read("generate.txt")?,
            read("repair.txt")?,
            read("format_repair.txt")?,
        )
    }

    pub fn check(&self) -> Result<(), PromptError> {
        let re = placeholder_re();
        for (template, text) in [
            ("system", &self.system),
            ("generate", &self.generate),
            ("repair", &self.repair),
            ("format_repair", &self.format_repair),
        ] {
            if let Some(c) = re.captures_iter(text).find(|c| !PLACEHOLDERS.contains(&&c[1])) {
                return Err(PromptError::UnknownPlaceholder {
                    template: template.into(),
                    name: c[1].to_owned(),
                });
            }
        }
        Ok(())
    }
}

/// Single-pass substitution, so inserted text is never rescanned.
fn fill(template: &str, values: &[(&str, &str)]) -> String {
    placeholder_re()
        .replace_all(template, |c: &regex::Captures<'_>| {
            values
                .iter()
                .find(|(k, _)| *k == &c[1])
                .map(|(_, v)| (*v).to_owned())
                .unwrap_or_default()
        })
        .into_owned()
}

fn numbered(items: &[String]) -> String {
    items
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{}. {}", i + 1, r.replace('\n', " ")))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn build_generation_prompt(spec: &FormattedSpec, templates: &PromptTemplates) -> Prompt {
    let serialized = serialize_spec(spec);
    let requirements = numbered(&spec.functional_requirements);
    let vals = [
        ("spec", serialized.trim_end()),
        ("requirements", requirements.as_str()),
        ("failing_assertions", ""),
        ("feedback", ""),
    ];
    Prompt {
        system_preamble: fill(&templates.system, &vals),
        user_message: fill(&templates.generate, &vals),
        purpose: Purpose::Generate,
        iteration: 0,
    }
}

/// Names of the suite's assertions cited by the verdict, in suite order. When
/// the verdict cites none of them, every assertion counts as failing.
pub fn failing_set(suite: &AssertionSuite, verdict: &TriageVerdict) -> Vec<String> {
    let cited = verdict.assertion_names();
    let hit: Vec<String> = suite
        .assertions
        .iter()
        .filter(|a| cited.contains(&a.name.as_str()))
        .map(|a| a.name.clone())
        .collect();
    if hit.is_empty() {
        suite.assertions.iter().map(|a| a.name.clone()).collect()
    } else {
        hit
    }
}

pub fn build_repair_prompt(
    suite: &AssertionSuite,
    feedback: &TriageVerdict,
    history: &ConversationHistory,
    templates: &PromptTemplates,
    feedback_max_lines: usize,
) -> Result<Prompt, PromptError> {
    if !feedback.is_repairable() {
        return Err(PromptError::InvalidFeedbackKind(feedback.label()));
    }
    let failing = failing_set(suite, feedback);
    let failing_text = suite
        .assertions
        .iter()
        .filter(|a| failing.contains(&a.name))
        .map(|a| a.source_text.trim_end())
        .collect::<Vec<_>>()
        .join("\n\n");
    let excerpt = feedback_excerpt(feedback, feedback_max_lines)
        .map_err(|_| PromptError::InvalidFeedbackKind(feedback.label()))?;
    let vals = [
        ("spec", ""),
        ("requirements", ""),
        ("failing_assertions", failing_text.as_str()),
        ("feedback", excerpt.as_str()),
    ];
    Ok(Prompt {
        system_preamble: fill(&templates.system, &vals),
        user_message: fill(&templates.repair, &vals),
        purpose: Purpose::Repair,
        iteration: history.next_iteration(),
    })
}

/// Retry prompt for a response that could not be split into assertions. It
/// keeps the purpose and iteration of the prompt it retries.
pub fn build_format_repair_prompt(original: &Prompt, problem: &str, templates: &PromptTemplates) -> Prompt {
    let vals = [
        ("spec", ""),
        ("requirements", ""),
        ("failing_assertions", ""),
        ("feedback", problem),
    ];
    Prompt {
        system_preamble: original.system_preamble.clone(),
        user_message: fill(&templates.format_repair, &vals),
        purpose: original.purpose,
        iteration: original.iteration,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub prompt: Prompt,
    pub response_text: String,
}

/// The prompts sent in one run and the responses they produced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationHistory {
    pub turns: Vec<Turn>,
}

impl ConversationHistory {
    pub fn next_iteration(&self) -> u32 {
        self.turns.last().map_or(0, |t| t.prompt.iteration + 1)
    }

    pub fn push(&mut self, prompt: Prompt, response_text: String) -> Result<(), PromptError> {
        let expected = self.next_iteration();
        if prompt.iteration != expected {
            return Err(PromptError::HistoryGap {
                expected,
                found: prompt.iteration,
            });
        }
        self.turns.push(Turn { prompt, response_text });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}
