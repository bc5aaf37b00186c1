//! Generates SystemVerilog assertion suites from design specifications with a
//! language model, then repairs them against a local parser and a simulator
//! until they run clean.
//!
//! The stages are independent modules. [`spec_format`] structures the input
//! document, [`llm`] builds prompts and talks to providers, [`sva`] parses and
//! renders assertions, [`sim`] composes workspaces and runs simulators,
//! [`triage`] classifies logs, and [`pipeline`] ties them into the bounded
//! repair loop. [`report`] tabulates finished runs and [`cli`] is the binary's
//! entry point.

pub mod cli;
pub mod llm;
pub mod pipeline;
pub mod report;
pub mod sim;
pub mod spec_format;
pub mod sva;
pub mod triage;
