//! Prompt construction, completion providers and extraction of assertion
//! suites from model responses.

mod extract;
mod prompt;
mod provider;

pub use extract::{extract_assertions, ExtractionFailure};
pub use prompt::{
    build_format_repair_prompt, build_generation_prompt, build_repair_prompt, failing_set,
    ConversationHistory, Prompt, PromptError, PromptTemplates, Purpose, Turn, PLACEHOLDERS,
};
pub use provider::{
    complete, CompletionProvider, ProviderError, ProviderResponse, RemoteConfig, RemoteProvider,
    ReplayProvider, TranscriptEntry, API_KEY_ENV,
};
