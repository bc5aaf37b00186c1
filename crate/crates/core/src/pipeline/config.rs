use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::llm::{CompletionProvider, PromptError, PromptTemplates, RemoteConfig, RemoteProvider, ReplayProvider};
use crate::sim::{DesignBundle, ExternalAdapter, ReplayAdapter, SimError, SimulatorAdapter};
use crate::spec_format::{
    deserialize_spec, extract_with, to_formatted, FormattedSpec, HeadingPattern, LabelMap, SpecDocument, SpecError,
};
use crate::triage::{PatternPack, TriageError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read run configuration {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("invalid run configuration {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error("a markdown spec needs a label_map")]
    MissingLabelMap,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Pack(#[from] TriageError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Design(#[from] SimError),
    #[error("transcript: {0}")]
    Transcript(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    Remote(RemoteConfig),
    Replay { transcript: PathBuf },
}

fn default_sim_timeout() -> u64 {
    60_000
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdapterConfig {
    External {
        #[serde(default)]
        compile_cmd: Vec<String>,
        run_cmd: Vec<String>,
        #[serde(default = "default_sim_timeout")]
        timeout_ms: u64,
    },
    Replay {
        replay_dir: PathBuf,
        #[serde(default = "default_sim_timeout")]
        timeout_ms: u64,
    },
}

impl AdapterConfig {
    pub fn timeout(&self) -> Duration {
        match self {
            AdapterConfig::External { timeout_ms, .. } | AdapterConfig::Replay { timeout_ms, .. } => {
                Duration::from_millis(*timeout_ms)
            }
        }
    }
}

fn default_max_lines() -> usize {
    20
}

/// Contents of a `.run.json` file. Relative paths are resolved against the
/// file's directory by [`RunConfig::load`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub design_name: String,
    /// Markdown-like document, or an already formatted `.spec.json`.
    pub spec: PathBuf,
    #[serde(default)]
    pub label_map: Option<LabelMap>,
    #[serde(default)]
    pub heading_pattern: Option<String>,
    pub design: DesignBundle,
    pub provider: ProviderConfig,
    pub adapter: AdapterConfig,
    pub pattern_pack: PathBuf,
    /// Directory with the four prompt templates; the built-in set when absent.
    #[serde(default)]
    pub prompts: Option<PathBuf>,
    /// Upper bound on repair rounds.
    pub max_iterations: u32,
    #[serde(default = "default_max_lines")]
    pub feedback_max_lines: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub baseline_assertion_count: u32,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_json(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let mut c: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Invalid {
            path: origin.to_owned(),
            message: e.to_string(),
        })?;
        if c.max_iterations == 0 {
            return Err(ConfigError::ZeroIterations);
        }
        resolve(base, &mut c.spec);
        for f in &mut c.design.design_files {
            resolve(base, f);
        }
        resolve(base, &mut c.design.testbench_file);
        resolve(base, &mut c.design.bind_template);
        match &mut c.provider {
            ProviderConfig::Replay { transcript } => resolve(base, transcript),
            ProviderConfig::Remote(_) => {}
        }
        match &mut c.adapter {
            AdapterConfig::Replay { replay_dir, .. } => resolve(base, replay_dir),
            AdapterConfig::External { .. } => {}
        }
        resolve(base, &mut c.pattern_pack);
        if let Some(p) = &mut c.prompts {
            resolve(base, p);
        }
        resolve(base, &mut c.output_dir);
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base, path)
    }

    pub fn load_spec(&self) -> Result<FormattedSpec, ConfigError> {
        let name = self.spec.to_string_lossy();
        if name.ends_with(".json") {
            let text = fs::read_to_string(&self.spec).map_err(|e| SpecError::Io {
                path: self.spec.clone(),
                message: e.to_string(),
            })?;
            return Ok(deserialize_spec(&text)?);
        }
        let doc = SpecDocument::read(&self.spec, &self.design_name)?;
        let pattern = match &self.heading_pattern {
            Some(p) => HeadingPattern::custom(p)?,
            None => HeadingPattern::default(),
        };
        let extract = extract_with(&doc, &pattern)?;
        let map = self.label_map.as_ref().ok_or(ConfigError::MissingLabelMap)?;
        Ok(to_formatted(&extract, map)?)
    }

    pub fn load_templates(&self) -> Result<PromptTemplates, ConfigError> {
        Ok(match &self.prompts {
            Some(dir) => PromptTemplates::load_dir(dir)?,
            None => PromptTemplates::default(),
        })
    }

    pub fn load_pack(&self) -> Result<PatternPack, ConfigError> {
        Ok(PatternPack::load(&self.pattern_pack)?)
    }

    /// A fresh provider; replay cursors start at the first transcript entry.
    pub fn build_provider(&self) -> Result<Box<dyn CompletionProvider>, ConfigError> {
        Ok(match &self.provider {
            ProviderConfig::Remote(rc) => Box::new(RemoteProvider::new(rc.clone())),
            ProviderConfig::Replay { transcript } => {
                Box::new(ReplayProvider::load(transcript).map_err(|e| ConfigError::Transcript(e.to_string()))?)
            }
        })
    }

    pub fn build_adapter(&self) -> Result<Box<dyn SimulatorAdapter>, ConfigError> {
        Ok(match &self.adapter {
            AdapterConfig::External {
                compile_cmd, run_cmd, ..
            } => {
                if run_cmd.is_empty() {
                    return Err(ConfigError::Invalid {
                        path: self.output_dir.clone(),
                        message: "adapter.run_cmd is empty".into(),
                    });
                }
                Box::new(ExternalAdapter {
                    compile_cmd: compile_cmd.clone(),
                    run_cmd: run_cmd.clone(),
                })
            }
            AdapterConfig::Replay { replay_dir, .. } => {
                if !replay_dir.is_dir() {
                    return Err(SimError::ReplayLogMissing(replay_dir.clone()).into());
                }
                Box::new(ReplayAdapter { dir: replay_dir.clone() })
            }
        })
    }
}
