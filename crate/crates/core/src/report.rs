//! Per-run summaries and the cross-run table.
//!
//! Column notes:
//! - `#Prompts` counts answered prompts, the initial generation included.
//!   Format retries are not counted.
//! - `Sim. Time` is the simulator-reported time of the last simulated iteration.
//! - `SVA Gen. Time` is the latency of the initial generation call.
//! - An initial assertion counts as a raw error if a syntax or simulation
//!   verdict cited it, or a repair retired it.

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{ArtifactBundle, Trace};
use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("trace has no iterations")]
    EmptyTrace,
    #[error("no reports with raw assertions")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub module_name: String,
    pub baseline_assertion_count: u32,
    pub generated_assertion_count: usize,
    pub prompt_count: u32,
    pub sim_time: Option<SimTime>,
    /// Milliseconds.
    pub sva_generation_time_ms: f64,
    pub raw_error_count: usize,
    pub raw_total: usize,
}

impl RunReport {
    pub fn sva_generation_time(&self) -> Duration {
        Duration::from_secs_f64(self.sva_generation_time_ms / 1000.0)
    }
}

/// Initial assertions that count as raw errors, in initial-suite order.
pub fn raw_errors(trace: &Trace) -> Result<Vec<String>, ReportError> {
    let first = trace.records.first().ok_or(ReportError::EmptyTrace)?;
    let mut flagged = BTreeSet::new();
    for r in &trace.records {
        if r.verdict.is_repairable() {
            flagged.extend(r.verdict.assertion_names().into_iter().map(str::to_owned));
        }
        flagged.extend(r.retired.iter().cloned());
    }
    Ok(first
        .suite
        .iter()
        .filter(|e| flagged.contains(&e.name))
        .map(|e| e.name.clone())
        .collect())
}

pub fn summarize(bundle: &ArtifactBundle) -> Result<RunReport, ReportError> {
    let trace = &bundle.trace;
    let first = trace.records.first().ok_or(ReportError::EmptyTrace)?;
    Ok(RunReport {
        module_name: trace.design_name.clone(),
        baseline_assertion_count: bundle.outcome.baseline_assertion_count,
        generated_assertion_count: bundle.outcome.final_assertions,
        prompt_count: trace.prompt_count,
        sim_time: trace.records.iter().rev().find_map(|r| r.sim_time.clone()),
        sva_generation_time_ms: bundle.timing.generation_latency_ms,
        raw_error_count: raw_errors(trace)?.len(),
        raw_total: first.suite.len(),
    })
}

/// Σ raw errors / Σ raw totals.
pub fn raw_error_rate(reports: &[RunReport]) -> Result<f64, ReportError> {
    let total: usize = reports.iter().map(|r| r.raw_total).sum();
    if total == 0 {
        return Err(ReportError::EmptyInput);
    }
    let errors: usize = reports.iter().map(|r| r.raw_error_count).sum();
    Ok(errors as f64 / total as f64)
}

/// `30.0%` style, one decimal.
pub fn format_rate(rate: f64) -> String {
    format!("{:.1}%", rate * 100.0)
}

const HEADERS: [&str; 6] = ["Module", "OT Assert.", "LLM Assert.", "#Prompts", "Sim. Time", "SVA Gen. Time"];

pub fn render_table(reports: &[RunReport]) -> String {
    let rows: Vec<[String; 6]> = reports
        .iter()
        .map(|r| {
            [
                r.module_name.clone(),
                r.baseline_assertion_count.to_string(),
                r.generated_assertion_count.to_string(),
                r.prompt_count.to_string(),
                r.sim_time.as_ref().map_or_else(|| "-".into(), SimTime::compact),
                format!("{:.2}s", r.sva_generation_time_ms / 1000.0),
            ]
        })
        .collect();
    let mut widths = HEADERS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 6]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for (cell, w) in cells.iter().zip(widths).skip(1) {
            s.push_str(&format!(" | {cell:>w$}"));
        }
        s.push('\n');
        s
    };
    let mut out = line(HEADERS);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row.each_ref().map(String::as_str)));
    }
    match raw_error_rate(reports) {
        Ok(rate) => {
            let e: usize = reports.iter().map(|r| r.raw_error_count).sum();
            let t: usize = reports.iter().map(|r| r.raw_total).sum();
            out.push_str(&format!("raw error rate: {} ({e}/{t})\n", format_rate(rate)));
        }
        Err(_) => out.push_str("no runs\n"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(name: &str, errors: usize, total: usize) -> RunReport {
        RunReport {
            module_name: name.into(),
            baseline_assertion_count: 0,
            generated_assertion_count: 11,
            prompt_count: 12,
            sim_time: Some(SimTime { value: 80, unit: "ns".into() }),
            sva_generation_time_ms: 6340.0,
            raw_error_count: errors,
            raw_total: total,
        }
    }

    #[test]
    fn rates() {
        assert_eq!(format_rate(raw_error_rate(&[report("a", 3, 10)]).unwrap()), "30.0%");
        assert_eq!(format_rate(raw_error_rate(&[report("a", 0, 10), report("b", 0, 4)]).unwrap()), "0.0%");
        assert_eq!(format_rate(raw_error_rate(&[report("a", 3, 10), report("b", 0, 10)]).unwrap()), "15.0%");
        assert_eq!(raw_error_rate(&[]), Err(ReportError::EmptyInput));
    }

    #[test]
    fn tables() {
        assert_eq!(
            render_table(&[]),
            "Module | OT Assert. | LLM Assert. | #Prompts | Sim. Time | SVA Gen. Time\n\
             -------+------------+-------------+----------+-----------+--------------\n\
             no runs\n"
        );
        let t = render_table(&[report("rv_timer", 3, 10)]);
        assert_eq!(
            t,
            "Module   | OT Assert. | LLM Assert. | #Prompts | Sim. Time | SVA Gen. Time\n\
             ---------+------------+-------------+----------+-----------+--------------\n\
             rv_timer |          0 |          11 |       12 |      80ns |         6.34s\n\
             raw error rate: 30.0% (3/10)\n"
        );
    }
}
