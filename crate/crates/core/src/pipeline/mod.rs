//! The generate, check and repair loop, its configuration and its on-disk trace.

mod config;
mod merge;
mod run;
mod trace;

pub use config::{AdapterConfig, ConfigError, ProviderConfig, RunConfig};
pub use merge::{duplicate_name, merge_repair, MergeError, Merged};
pub use run::{run_pipeline, Pipeline, PipelineError, PipelineOutcome, RunArtifacts};
pub use trace::{
    persist_trace, restore, snapshot, ArtifactBundle, FormatRetry, Gate, Halt, IterationRecord, OutcomeSummary,
    RecordTiming, Status, SuiteEntry, Timing, Trace, TraceError, BUG_ADVICE, EXHAUSTED_ADVICE, FINAL_FILE,
    OUTCOME_FILE, TIMING_FILE, TRACE_FILE, WORKSPACES_DIR,
};
