//! Simulation workspaces and simulator adapters.
//!
//! A workspace is a fresh directory holding copies of the design sources, the
//! testbench and a rendered `generated_assertions.sv`. Adapters run a
//! compile step and a run step inside it; their interleaved output is the
//! [`SimulationLog`] handed to triage.

use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sva::AssertionSuite;
use crate::triage::{PatternPack, PHASE_MARKER};

pub const ASSERTIONS_FILE: &str = "generated_assertions.sv";
pub const LOG_FILE: &str = "sim.log";
pub const RTL_DIR: &str = "rtl";
pub const TB_DIR: &str = "tb";

/// Extra time allowed after a timeout kill for output to drain.
pub const KILL_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Error)]
pub enum SimError {
    #[error("I/O failure on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("bind template {0} is missing or lacks the {{{{assertions}}}} placeholder")]
    BindTemplateMissing(PathBuf),
    #[error("bind template uses unknown placeholder '{{{{{0}}}}}'")]
    UnknownPlaceholder(String),
    #[error("simulator executable not found: {0}")]
    SimulatorNotFound(String),
    #[error("simulation timed out after {timeout_ms} ms")]
    Timeout { timeout_ms: u64, log: SimulationLog },
    #[error("simulator crashed without output (status {0})")]
    CrashWithoutOutput(i32),
    #[error("replay log {0} not found")]
    ReplayLogMissing(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |e| SimError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

/// Design sources, testbench and the template that wraps generated assertions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBundle {
    pub design_files: Vec<PathBuf>,
    pub testbench_file: PathBuf,
    #[serde(default)]
    pub testcase_description: String,
    pub top_module: String,
    pub bind_template: PathBuf,
}

impl DesignBundle {
    /// Checks that every referenced file is readable.
    pub fn check(&self) -> Result<(), SimError> {
        for p in self.design_files.iter().chain([&self.testbench_file, &self.bind_template]) {
            fs::File::open(p).map_err(io_err(p))?;
        }
        if self.top_module.is_empty() {
            return Err(SimError::Io {
                path: self.testbench_file.clone(),
                message: "top_module is empty".into(),
            });
        }
        Ok(())
    }
}

/// Lines `first..=last` of `generated_assertions.sv` hold assertion `name`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionSpan {
    pub name: String,
    pub first_line: u32,
    pub last_line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    pub root: PathBuf,
    pub spans: Vec<AssertionSpan>,
}

impl Workspace {
    /// The assertion whose block contains `line` of the generated file.
    pub fn assertion_at(&self, line: u32) -> Option<&str> {
        self.spans
            .iter()
            .find(|s| s.first_line <= line && line <= s.last_line)
            .map(|s| s.name.as_str())
    }
}

fn copy_into(src: &Path, dir: &Path) -> Result<(), SimError> {
    let name = src.file_name().ok_or_else(|| SimError::Io {
        path: src.to_owned(),
        message: "not a file path".into(),
    })?;
    let bytes = fs::read(src).map_err(io_err(src))?;
    let dest = dir.join(name);
    fs::write(&dest, bytes).map_err(io_err(&dest))
}

/// Renders the bind template around the suite. Returns the file text and the
/// line span of each assertion in it.
pub fn render_assertions_file(
    template: &str,
    bundle: &DesignBundle,
    suite: &AssertionSuite,
) -> Result<(String, Vec<AssertionSpan>), SimError> {
    let re = regex::Regex::new(r"\{\{\s*([A-Za-z_]+)\s*\}\}").expect("static regex");
    if let Some(bad) = re
        .captures_iter(template)
        .map(|c| c[1].to_owned())
        .find(|n| !matches!(n.as_str(), "assertions" | "top" | "design"))
    {
        return Err(SimError::UnknownPlaceholder(bad));
    }
    let Some(at) = re
        .captures_iter(template)
        .find(|c| &c[1] == "assertions")
        .map(|c| c.get(0).expect("match").start())
    else {
        return Err(SimError::BindTemplateMissing(bundle.bind_template.clone()));
    };
    let before = &template[..at];
    let before = re.replace_all(before, |c: &regex::Captures<'_>| match &c[1] {
        "top" => bundle.top_module.clone(),
        "design" => suite.design_name.clone(),
        _ => c[0].to_owned(),
    });
    let mut line = before.matches('\n').count() as u32 + 1;
    let mut body = String::new();
    let mut spans = Vec::new();
    for (i, a) in suite.assertions.iter().enumerate() {
        if i > 0 {
            body.push_str("\n\n");
            line += 2;
        }
        let block = a.to_block();
        let n = block.lines().count().max(1) as u32;
        spans.push(AssertionSpan {
            name: a.name.clone(),
            first_line: line,
            last_line: line + n - 1,
        });
        line += n - 1;
        body.push_str(&block);
    }
    let rest = &template[at..];
    let rest = re.replacen(rest, 1, regex::NoExpand(&body)).into_owned();
    let rest = re.replace_all(&rest, |c: &regex::Captures<'_>| match &c[1] {
        "top" => bundle.top_module.clone(),
        "design" => suite.design_name.clone(),
        _ => c[0].to_owned(),
    });
    Ok((format!("{before}{rest}"), spans))
}

/// Creates `dest` afresh (removing any previous contents) with `rtl/`, `tb/`
/// and `generated_assertions.sv`. Source files are only read.
pub fn compose_workspace(bundle: &DesignBundle, suite: &AssertionSuite, dest: &Path) -> Result<Workspace, SimError> {
    let template = fs::read_to_string(&bundle.bind_template)
        .map_err(|_| SimError::BindTemplateMissing(bundle.bind_template.clone()))?;
    let (text, spans) = render_assertions_file(&template, bundle, suite)?;
    if dest.exists() {
        fs::remove_dir_all(dest).map_err(io_err(dest))?;
    }
    let rtl = dest.join(RTL_DIR);
    let tb = dest.join(TB_DIR);
    fs::create_dir_all(&rtl).map_err(io_err(&rtl))?;
    fs::create_dir_all(&tb).map_err(io_err(&tb))?;
    for f in &bundle.design_files {
        copy_into(f, &rtl)?;
    }
    copy_into(&bundle.testbench_file, &tb)?;
    let out = dest.join(ASSERTIONS_FILE);
    fs::write(&out, text).map_err(io_err(&out))?;
    Ok(Workspace {
        root: dest.to_owned(),
        spans,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTime {
    pub value: u64,
    pub unit: String,
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl SimTime {
    /// `80ns` style, as used in report tables.
    pub fn compact(&self) -> String {
        format!("{}{}", self.value, self.unit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationLog {
    /// Exactly what the simulator emitted (plus harness phase markers).
    pub raw_text: String,
    pub exit_code: i32,
    pub wall_time: Duration,
    pub sim_time_reported: Option<SimTime>,
}

/// The simulator-reported final simulation time: the last line matching the
/// pack's time pattern.
pub fn report_sim_time(raw_text: &str, pack: &PatternPack) -> Option<SimTime> {
    raw_text
        .lines()
        .rev()
        .find_map(|l| pack.sim_time_pattern.captures(l))
        .and_then(|c| {
            Some(SimTime {
                value: c.name("value")?.as_str().parse().ok()?,
                unit: c.name("unit")?.as_str().to_owned(),
            })
        })
}

/// A way of running a composed workspace. Implementations hold no per-run state.
pub trait SimulatorAdapter: Send + Sync {
    fn identity(&self) -> &str;

    fn run(&self, workspace: &Path, top: &str, iteration: u32, timeout: Duration) -> Result<SimulationLog, SimError>;
}

/// Runs the adapter and persists the captured log as `sim.log` in the workspace.
pub fn run_simulation(
    workspace: &Path,
    top: &str,
    adapter: &dyn SimulatorAdapter,
    iteration: u32,
    timeout: Duration,
) -> Result<SimulationLog, SimError> {
    let result = adapter.run(workspace, top, iteration, timeout);
    let text = match &result {
        Ok(log) => Some(&log.raw_text),
        Err(SimError::Timeout { log, .. }) => Some(&log.raw_text),
        Err(_) => None,
    };
    if let Some(text) = text {
        let path = workspace.join(LOG_FILE);
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    result
}

/// Spawns external commands: a compile step, then (if it succeeded) a run step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalAdapter {
    pub compile_cmd: Vec<String>,
    pub run_cmd: Vec<String>,
}

fn substitute(argv: &[String], workspace: &Path, top: &str) -> Vec<String> {
    argv.iter()
        .map(|a| {
            a.replace("{{workspace}}", &workspace.display().to_string())
                .replace("{{top}}", top)
        })
        .collect()
}

struct StepResult {
    exit_code: i32,
    signalled: bool,
    timed_out: bool,
}

fn kill_group(pid: u32) {
    // SAFETY: kill(2) with a negative pid targets the process group we created.
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

fn run_step(
    argv: &[String],
    cwd: &Path,
    phase: &str,
    deadline: Instant,
    buf: &Arc<Mutex<Vec<u8>>>,
) -> Result<StepResult, SimError> {
    use std::os::unix::process::{CommandExt, ExitStatusExt};

    let (mut reader, writer) = std::io::pipe().map_err(io_err(cwd))?;
    let writer_err = writer.try_clone().map_err(io_err(cwd))?;
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(writer)
        .stderr(writer_err)
        .process_group(0);
    let spawned = cmd.spawn();
    drop(cmd);
    let mut child = spawned.map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
            SimError::SimulatorNotFound(argv[0].clone())
        }
        _ => SimError::Io {
            path: PathBuf::from(&argv[0]),
            message: e.to_string(),
        },
    })?;

    let (done_tx, done_rx) = mpsc::channel();
    let shared = Arc::clone(buf);
    let marker = format!("{PHASE_MARKER}{phase}\n");
    thread::spawn(move || {
        let mut chunk = [0u8; 8192];
        let mut first = true;
        loop {
            match reader.read(&mut chunk) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let mut b = shared.lock().expect("log buffer");
                    if first {
                        if !b.is_empty() && !b.ends_with(b"\n") {
                            b.push(b'\n');
                        }
                        b.extend_from_slice(marker.as_bytes());
                        first = false;
                    }
                    b.extend_from_slice(&chunk[..n]);
                }
            }
        }
        let _ = done_tx.send(());
    });

    let pid = child.id();
    let mut timed_out = false;
    let status = loop {
        match child.try_wait().map_err(io_err(cwd))? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                timed_out = true;
                kill_group(pid);
                break child.wait().map_err(io_err(cwd))?;
            }
            None => thread::sleep(Duration::from_millis(5)),
        }
    };
    // Reap stragglers that inherited the pipe.
    kill_group(pid);
    let _ = done_rx.recv_timeout(KILL_GRACE);

    Ok(StepResult {
        exit_code: status
            .code()
            .unwrap_or_else(|| 128 + status.signal().unwrap_or(0)),
        signalled: status.code().is_none(),
        timed_out,
    })
}

impl SimulatorAdapter for ExternalAdapter {
    fn identity(&self) -> &str {
        "external"
    }

    fn run(&self, workspace: &Path, top: &str, _iteration: u32, timeout: Duration) -> Result<SimulationLog, SimError> {
        let started = Instant::now();
        let deadline = started + timeout;
        let buf = Arc::new(Mutex::new(Vec::new()));
        let mut exit_code = 0;
        let mut crashed = false;
        for (phase, argv) in [("compile", &self.compile_cmd), ("run", &self.run_cmd)] {
            if argv.is_empty() {
                continue;
            }
            let argv = substitute(argv, workspace, top);
            let step = run_step(&argv, workspace, phase, deadline, &buf)?;
            exit_code = step.exit_code;
            crashed = step.signalled;
            if step.timed_out {
                let raw = String::from_utf8_lossy(&buf.lock().expect("log buffer")).into_owned();
                return Err(SimError::Timeout {
                    timeout_ms: timeout.as_millis() as u64,
                    log: SimulationLog {
                        raw_text: raw,
                        exit_code,
                        wall_time: started.elapsed(),
                        sim_time_reported: None,
                    },
                });
            }
            if exit_code != 0 {
                break;
            }
        }
        let raw_text = String::from_utf8_lossy(&buf.lock().expect("log buffer")).into_owned();
        if crashed && raw_text.is_empty() {
            return Err(SimError::CrashWithoutOutput(exit_code));
        }
        Ok(SimulationLog {
            raw_text,
            exit_code,
            wall_time: started.elapsed(),
            sim_time_reported: None,
        })
    }
}

/// Returns canned logs `iter<N>.log` from a directory, with an optional
/// `iter<N>.exit` holding the exit status (default 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayAdapter {
    pub dir: PathBuf,
}

impl SimulatorAdapter for ReplayAdapter {
    fn identity(&self) -> &str {
        "replay"
    }

    fn run(&self, _workspace: &Path, _top: &str, iteration: u32, _timeout: Duration) -> Result<SimulationLog, SimError> {
        let started = Instant::now();
        let path = self.dir.join(format!("iter{iteration}.log"));
        let bytes = fs::read(&path).map_err(|_| SimError::ReplayLogMissing(path.clone()))?;
        let exit_path = self.dir.join(format!("iter{iteration}.exit"));
        let exit_code = match fs::read_to_string(&exit_path) {
            Ok(s) => s.trim().parse().map_err(|_| SimError::Io {
                path: exit_path.clone(),
                message: format!("not an integer exit status: {:?}", s.trim()),
            })?,
            Err(_) => 0,
        };
        Ok(SimulationLog {
            raw_text: String::from_utf8_lossy(&bytes).into_owned(),
            exit_code,
            wall_time: started.elapsed(),
            sim_time_reported: None,
        })
    }
}
