use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::merge::{duplicate_name, merge_repair};
use super::trace::{
    persist_trace, snapshot, FormatRetry, Gate, Halt, IterationRecord, OutcomeSummary, RecordTiming, Status,
    Timing, Trace, TraceError, BUG_ADVICE, EXHAUSTED_ADVICE, WORKSPACES_DIR,
};
use crate::llm::{
    build_format_repair_prompt, build_generation_prompt, build_repair_prompt, extract_assertions, failing_set,
    CompletionProvider, ConversationHistory, ExtractionFailure, Prompt, PromptTemplates, ProviderError,
};
use crate::sim::{compose_workspace, report_sim_time, run_simulation, DesignBundle, SimError, SimulatorAdapter, ASSERTIONS_FILE};
use crate::spec_format::FormattedSpec;
use crate::sva::{validate_suite, AssertionSuite, Origin};
use crate::triage::{classify, parse_log, Category, LogMessage, PatternPack, Phase, Severity, TriageVerdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("cannot prepare {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineOutcome {
    Converged {
        suite: AssertionSuite,
    },
    ImplementationBugSuspected {
        suite: AssertionSuite,
        evidence: Vec<LogMessage>,
    },
    /// The repair budget ran out, or a provider or simulator failed hard.
    /// `suite` is the last one checked.
    ExhaustedIterations {
        suite: AssertionSuite,
    },
}

impl PipelineOutcome {
    pub fn status(&self) -> Status {
        match self {
            PipelineOutcome::Converged { .. } => Status::Converged,
            PipelineOutcome::ImplementationBugSuspected { .. } => Status::ImplementationBugSuspected,
            PipelineOutcome::ExhaustedIterations { .. } => Status::Exhausted,
        }
    }

    pub fn suite(&self) -> &AssertionSuite {
        match self {
            PipelineOutcome::Converged { suite }
            | PipelineOutcome::ImplementationBugSuspected { suite, .. }
            | PipelineOutcome::ExhaustedIterations { suite } => suite,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status().exit_code()
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub outcome: PipelineOutcome,
    pub trace: Trace,
    pub timing: Timing,
    pub history: ConversationHistory,
}

impl RunArtifacts {
    pub fn summary(&self, baseline_assertion_count: u32) -> OutcomeSummary {
        let status = self.outcome.status();
        OutcomeSummary {
            status,
            design_name: self.trace.design_name.clone(),
            final_assertions: self.outcome.suite().len(),
            prompt_count: self.trace.prompt_count,
            provider_calls: self.trace.provider_calls,
            iterations: self.trace.records.len(),
            baseline_assertion_count,
            advice: match status {
                Status::Converged => None,
                Status::ImplementationBugSuspected => Some(BUG_ADVICE.into()),
                Status::Exhausted => Some(EXHAUSTED_ADVICE.into()),
            },
            evidence: match &self.outcome {
                PipelineOutcome::ImplementationBugSuspected { evidence, .. } => evidence.clone(),
                _ => Vec::new(),
            },
            error: self.trace.halt.as_ref().map(|h| format!("{} at iteration {}: {}", h.stage, h.n, h.error)),
        }
    }
}

/// Everything a run needs besides the provider and the simulator.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub design_name: String,
    pub spec: FormattedSpec,
    pub bundle: DesignBundle,
    pub pack: PatternPack,
    pub templates: PromptTemplates,
    pub max_iterations: u32,
    pub feedback_max_lines: usize,
    pub sim_timeout: Duration,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn extraction_verdict(problem: &str) -> TriageVerdict {
    TriageVerdict::SyntaxError {
        messages: vec![LogMessage::new(
            Phase::Compile,
            Severity::Error,
            Category::Syntax,
            format!("response could not be read as assertions: {problem}"),
        )],
    }
}

fn local_verdict(suite: &AssertionSuite) -> Option<TriageVerdict> {
    let failing = validate_suite(suite);
    if failing.is_empty() {
        return None;
    }
    let messages = failing
        .into_iter()
        .flat_map(|(name, diags)| {
            diags.into_iter().map(move |d| {
                let mut m = LogMessage::new(Phase::Compile, Severity::Error, Category::Syntax, format!("{name}: {d}"));
                m.assertion_name = Some(name.clone());
                m
            })
        })
        .collect();
    Some(TriageVerdict::SyntaxError { messages })
}

/// Extraction plus the uniqueness check a response must pass.
fn read_response(text: &str, design: &str, origin: Origin) -> Result<AssertionSuite, String> {
    let suite = extract_assertions(text, design, origin).map_err(|e: ExtractionFailure| e.to_string())?;
    match duplicate_name(&suite) {
        Some(dup) => Err(format!("property '{dup}' is declared more than once")),
        None => Ok(suite),
    }
}

struct Asked {
    text: String,
    latency: Duration,
    retry: Option<(FormatRetry, Duration)>,
    suite: Result<AssertionSuite, String>,
}

struct Run<'a> {
    p: &'a Pipeline,
    provider: &'a dyn CompletionProvider,
    calls: u32,
}

impl Run<'_> {
    /// Sends a prompt; a repair answer that cannot be read gets one format retry.
    fn ask(&mut self, prompt: &Prompt, origin: Origin, allow_retry: bool) -> Result<Asked, (String, ProviderError)> {
        self.calls += 1;
        let resp = self.provider.complete(prompt).map_err(|e| ("provider".to_owned(), e))?;
        let mut suite = read_response(&resp.text, &self.p.design_name, origin);
        let mut retry = None;
        if let (Err(problem), true) = (suite.clone(), allow_retry) {
            let fr = build_format_repair_prompt(prompt, &problem, &self.p.templates);
            self.calls += 1;
            let again = self.provider.complete(&fr).map_err(|e| ("format_repair".to_owned(), e))?;
            suite = read_response(&again.text, &self.p.design_name, origin);
            retry = Some((
                FormatRetry {
                    problem,
                    prompt: fr,
                    response: again.text,
                },
                again.latency,
            ));
        }
        Ok(Asked {
            text: resp.text,
            latency: resp.latency,
            retry,
            suite,
        })
    }
}

/// Names assertions cited only by a file:line into the generated file.
fn attribute(messages: &mut [LogMessage], ws: &crate::sim::Workspace) {
    for m in messages.iter_mut().filter(|m| m.assertion_name.is_none()) {
        if let Some(loc) = &m.location {
            if Path::new(&loc.file).file_name().is_some_and(|f| f == ASSERTIONS_FILE) {
                m.assertion_name = ws.assertion_at(loc.line).map(str::to_owned);
            }
        }
    }
}

struct Checked {
    gate: Gate,
    verdict: TriageVerdict,
    workspace: Option<String>,
    exit_code: Option<i32>,
    sim_time: Option<crate::sim::SimTime>,
    sim_wall: Option<Duration>,
}

impl Pipeline {
    fn simulate(&self, suite: &AssertionSuite, adapter: &dyn SimulatorAdapter, n: u32, out: &Path) -> Result<Checked, SimError> {
        let rel = format!("{WORKSPACES_DIR}/iter{n}");
        let ws = compose_workspace(&self.bundle, suite, &out.join(&rel))?;
        let log = run_simulation(&ws.root, &self.bundle.top_module, adapter, n, self.sim_timeout)?;
        let mut messages = parse_log(&log.raw_text, &self.pack);
        attribute(&mut messages, &ws);
        Ok(Checked {
            gate: Gate::Simulator,
            verdict: classify(&messages, log.exit_code),
            workspace: Some(rel),
            exit_code: Some(log.exit_code),
            sim_time: report_sim_time(&log.raw_text, &self.pack),
            sim_wall: Some(log.wall_time),
        })
    }

    /// Runs the generate/check/repair loop. Workspaces are composed under
    /// `output_dir/workspaces`; nothing else is written.
    pub fn run(
        &self,
        provider: &dyn CompletionProvider,
        adapter: &dyn SimulatorAdapter,
        output_dir: &Path,
    ) -> Result<RunArtifacts, PipelineError> {
        let started = Instant::now();
        let ws_root = output_dir.join(WORKSPACES_DIR);
        if ws_root.exists() {
            fs::remove_dir_all(&ws_root).map_err(|e| PipelineError::Io {
                path: ws_root.clone(),
                message: e.to_string(),
            })?;
        }
        let mut run = Run {
            p: self,
            provider,
            calls: 0,
        };
        let mut history = ConversationHistory::default();
        let mut records: Vec<IterationRecord> = Vec::new();
        let mut timing = Timing::default();
        let trace = |records: Vec<IterationRecord>, calls: u32, history: &ConversationHistory, halt: Option<Halt>| Trace {
            design_name: self.design_name.clone(),
            max_iterations: self.max_iterations,
            prompt_count: history.len() as u32,
            provider_calls: calls,
            records,
            halt,
        };

        let prompt = build_generation_prompt(&self.spec, &self.templates);
        let asked = match run.ask(&prompt, Origin::InitialGeneration, false) {
            Ok(a) => a,
            Err((stage, e)) => {
                let halt = Halt { n: 0, stage, error: e.to_string() };
                timing.total_wall_ms = ms(started.elapsed());
                return Ok(RunArtifacts {
                    outcome: PipelineOutcome::ExhaustedIterations {
                        suite: AssertionSuite::new(&self.design_name),
                    },
                    trace: trace(records, run.calls, &history, Some(halt)),
                    timing,
                    history,
                });
            }
        };
        timing.generation_latency_ms = ms(asked.latency);

        let mut n: u32 = 0;
        let mut suite = AssertionSuite::new(&self.design_name);
        let mut pending = Some((prompt, asked));
        let mut retired = Vec::new();
        loop {
            let iter_started = Instant::now();
            let (prompt, asked) = pending.take().expect("a response per iteration");
            let mut unreadable = None;
            match asked.suite {
                Ok(s) if n == 0 => suite = s,
                Ok(s) => {
                    let failing = records.last().map(|r| r.failing.clone()).unwrap_or_default();
                    let merged = merge_repair(&suite, &s, &failing).expect("duplicates rejected on read");
                    suite = merged.suite;
                    retired = merged.retired;
                }
                Err(problem) => unreadable = Some(problem),
            }
            history
                .push(prompt.clone(), asked.text.clone())
                .expect("iterations follow the history");

            let checked = match &unreadable {
                Some(problem) => Ok(Checked {
                    gate: Gate::Extraction,
                    verdict: extraction_verdict(problem),
                    workspace: None,
                    exit_code: None,
                    sim_time: None,
                    sim_wall: None,
                }),
                None => match local_verdict(&suite) {
                    Some(verdict) => Ok(Checked {
                        gate: Gate::Local,
                        verdict,
                        workspace: None,
                        exit_code: None,
                        sim_time: None,
                        sim_wall: None,
                    }),
                    None => self.simulate(&suite, adapter, n, output_dir),
                },
            };
            let (fr, fr_latency) = match asked.retry {
                Some((fr, d)) => (Some(fr), Some(ms(d))),
                None => (None, None),
            };
            let checked = match checked {
                Ok(c) => c,
                Err(e) => {
                    let halt = Halt {
                        n,
                        stage: "simulation".into(),
                        error: e.to_string(),
                    };
                    timing.records.push(RecordTiming {
                        n,
                        prompt_latency_ms: Some(ms(asked.latency)),
                        format_retry_latency_ms: fr_latency,
                        simulation_wall_ms: None,
                        wall_ms: ms(iter_started.elapsed()),
                    });
                    timing.total_wall_ms = ms(started.elapsed());
                    return Ok(RunArtifacts {
                        outcome: PipelineOutcome::ExhaustedIterations { suite },
                        trace: trace(records, run.calls, &history, Some(halt)),
                        timing,
                        history,
                    });
                }
            };

            let mut record = IterationRecord {
                n,
                gate: checked.gate,
                suite: snapshot(&suite),
                verdict: checked.verdict.clone(),
                prompt: Some(prompt),
                response: Some(asked.text),
                format_retry: fr,
                retired: std::mem::take(&mut retired),
                failing: Vec::new(),
                workspace: checked.workspace,
                exit_code: checked.exit_code,
                sim_time: checked.sim_time,
            };
            let finish = |records: &mut Vec<IterationRecord>, record: IterationRecord, timing: &mut Timing| {
                records.push(record);
                timing.records.push(RecordTiming {
                    n,
                    prompt_latency_ms: Some(ms(asked.latency)),
                    format_retry_latency_ms: fr_latency,
                    simulation_wall_ms: checked.sim_wall.map(ms),
                    wall_ms: ms(iter_started.elapsed()),
                });
            };

            let outcome = match &checked.verdict {
                TriageVerdict::NoError => Some(PipelineOutcome::Converged { suite: suite.clone() }),
                TriageVerdict::TestcaseFailure { messages } => Some(PipelineOutcome::ImplementationBugSuspected {
                    suite: suite.clone(),
                    evidence: messages.clone(),
                }),
                _ if n >= self.max_iterations => Some(PipelineOutcome::ExhaustedIterations { suite: suite.clone() }),
                _ => None,
            };
            if let Some(outcome) = outcome {
                finish(&mut records, record, &mut timing);
                timing.total_wall_ms = ms(started.elapsed());
                return Ok(RunArtifacts {
                    outcome,
                    trace: trace(records, run.calls, &history, None),
                    timing,
                    history,
                });
            }

            record.failing = failing_set(&suite, &checked.verdict);
            finish(&mut records, record, &mut timing);
            let prompt = build_repair_prompt(
                &suite,
                &checked.verdict,
                &history,
                &self.templates,
                self.feedback_max_lines,
            )
            .expect("verdict is repairable");
            match run.ask(&prompt, Origin::Repair(n + 1), true) {
                Ok(a) => pending = Some((prompt, a)),
                Err((stage, e)) => {
                    let halt = Halt {
                        n: n + 1,
                        stage,
                        error: e.to_string(),
                    };
                    timing.total_wall_ms = ms(started.elapsed());
                    return Ok(RunArtifacts {
                        outcome: PipelineOutcome::ExhaustedIterations { suite },
                        trace: trace(records, run.calls, &history, Some(halt)),
                        timing,
                        history,
                    });
                }
            }
            n += 1;
        }
    }
}

/// Loads a run configuration's inputs, runs the loop and persists the
/// artifact bundle under the configured output directory.
pub fn run_pipeline(config: &RunConfig) -> Result<RunArtifacts, PipelineError> {
    let spec = config.load_spec()?;
    config.design.check().map_err(ConfigError::from)?;
    let pipeline = Pipeline {
        design_name: config.design_name.clone(),
        spec,
        bundle: config.design.clone(),
        pack: config.load_pack()?,
        templates: config.load_templates()?,
        max_iterations: config.max_iterations,
        feedback_max_lines: config.feedback_max_lines,
        sim_timeout: config.adapter.timeout(),
    };
    let provider = config.build_provider()?;
    let adapter = config.build_adapter()?;
    let artifacts = pipeline.run(provider.as_ref(), adapter.as_ref(), &config.output_dir)?;
    persist_trace(
        &artifacts.trace,
        &artifacts.timing,
        &artifacts.summary(config.baseline_assertion_count),
        artifacts.outcome.suite(),
        &config.output_dir,
    )?;
    Ok(artifacts)
}
