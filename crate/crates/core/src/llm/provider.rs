use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::prompt::{Prompt, Purpose};

/// Environment variable holding the remote provider's bearer token.
pub const API_KEY_ENV: &str = "CHIRAAG_API_KEY";

const EXCERPT_CHARS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("provider timed out after {0} ms")]
    ProviderTimeout(u64),
    #[error("provider rejected the request with status {status}: {excerpt}")]
    ProviderRejected { status: u16, excerpt: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("transcript exhausted after {0} responses")]
    TranscriptExhausted(usize),
    #[error("transcript entry {index} is for {found:?} but the prompt is for {expected:?}")]
    TranscriptMismatch {
        index: usize,
        expected: Purpose,
        found: Purpose,
    },
    #[error("cannot load transcript {path}: {message}")]
    TranscriptInvalid { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderResponse {
    /// May be empty; providers can fail soft.
    pub text: String,
    pub provider_id: String,
    pub latency: Duration,
}

pub trait CompletionProvider: Send + Sync {
    fn id(&self) -> &str;

    fn complete(&self, prompt: &Prompt) -> Result<ProviderResponse, ProviderError>;
}

pub fn complete(prompt: &Prompt, provider: &dyn CompletionProvider) -> Result<ProviderResponse, ProviderError> {
    provider.complete(prompt)
}

/// One scripted response. `latency_ms` lets a replay reproduce recorded timings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub purpose: Purpose,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
}

/// Returns transcript entries in order. Build one per run: the cursor is the
/// run's position in the script.
#[derive(Debug)]
pub struct ReplayProvider {
    entries: Vec<TranscriptEntry>,
    cursor: Mutex<usize>,
}

impl ReplayProvider {
    pub fn new(entries: Vec<TranscriptEntry>) -> Self {
        ReplayProvider {
            entries,
            cursor: Mutex::new(0),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let invalid = |message: String| ProviderError::TranscriptInvalid {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| invalid(e.to_string()))?;
        let entries = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
        Ok(Self::new(entries))
    }

    pub fn consumed(&self) -> usize {
        *self.cursor.lock().expect("cursor")
    }
}

impl CompletionProvider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&self, prompt: &Prompt) -> Result<ProviderResponse, ProviderError> {
        let mut cursor = self.cursor.lock().expect("cursor");
        let entry = self
            .entries
            .get(*cursor)
            .ok_or(ProviderError::TranscriptExhausted(self.entries.len()))?;
        if entry.purpose != prompt.purpose {
            return Err(ProviderError::TranscriptMismatch {
                index: *cursor,
                expected: prompt.purpose,
                found: entry.purpose,
            });
        }
        *cursor += 1;
        Ok(ProviderResponse {
            text: entry.text.clone(),
            provider_id: "replay".into(),
            latency: Duration::from_millis(entry.latency_ms.unwrap_or(0)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Zero asks for deterministic decoding where the provider supports it.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout_ms() -> u64 {
    120_000
}

fn default_retries() -> u32 {
    2
}

/// Chat-completions over HTTP. The bearer token, if any, comes from
/// [`API_KEY_ENV`].
#[derive(Debug)]
pub struct RemoteProvider {
    config: RemoteConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    backoff: Duration,
}

impl RemoteProvider {
    pub fn new(config: RemoteConfig) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: RemoteConfig, api_key: Option<String>) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        RemoteProvider {
            config,
            api_key,
            agent,
            backoff: Duration::from_millis(250),
        }
    }

    /// Base delay between retries, doubled after each attempt.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn request_body(&self, prompt: &Prompt) -> Value {
        json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": prompt.system_preamble},
                {"role": "user", "content": prompt.user_message},
            ],
        })
    }

    fn attempt(&self, body: &Value) -> Result<String, (ProviderError, bool)> {
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body) {
            Ok(resp) => {
                let value: Value = resp
                    .into_json()
                    .map_err(|e| (ProviderError::MalformedResponse(e.to_string()), false))?;
                value["choices"][0]["message"]["content"]
                    .as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| {
                        (
                            ProviderError::MalformedResponse("no choices[0].message.content".into()),
                            false,
                        )
                    })
            }
            Err(ureq::Error::Status(status, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                let excerpt: String = body.chars().take(EXCERPT_CHARS).collect();
                let transient = status == 429 || status >= 500;
                Err((ProviderError::ProviderRejected { status, excerpt }, transient))
            }
            Err(ureq::Error::Transport(t)) => {
                let timed_out = std::error::Error::source(&t)
                    .and_then(|s| s.downcast_ref::<std::io::Error>())
                    .is_some_and(|e| {
                        matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock)
                    });
                if timed_out {
                    Err((ProviderError::ProviderTimeout(self.config.timeout_ms), true))
                } else {
                    Err((ProviderError::Transport(t.to_string()), true))
                }
            }
        }
    }
}

impl CompletionProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, prompt: &Prompt) -> Result<ProviderResponse, ProviderError> {
        let body = self.request_body(prompt);
        let started = Instant::now();
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => {
                    return Ok(ProviderResponse {
                        text,
                        provider_id: self.config.model.clone(),
                        latency: started.elapsed(),
                    })
                }
                Err((err, transient)) => {
                    if !transient || attempt >= self.config.max_retries {
                        return Err(err);
                    }
                    attempt += 1;
                    thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
}
