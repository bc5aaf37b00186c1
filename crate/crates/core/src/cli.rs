//! Command-line entry points.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::pipeline::{run_pipeline, ArtifactBundle, PipelineOutcome, RunConfig};
use crate::report::{render_table, summarize, RunReport};
use crate::spec_format::{extract, serialize_spec, to_formatted, LabelMap, SpecDocument};
use crate::sva::{parse_sva_file, suite_diagnostics, sva_blocks};
use crate::triage::{classify, parse_log, PatternPack, TriageVerdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "assertgen", version, about = "Generate and repair SystemVerilog assertions from a design specification")]
pub struct Cli {
    /// Run configuration (.run.json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the configuration's output_dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a specification document into a .spec.json file.
    Format {
        /// Specification document; taken from --config when omitted.
        input: Option<PathBuf>,
        /// JSON object mapping labels to source headings.
        #[arg(long)]
        label_map: Option<PathBuf>,
        #[arg(long)]
        design: Option<String>,
    },
    /// Run the full generate, check and repair loop for --config.
    Generate,
    /// Classify a simulator log and print the verdict.
    Triage {
        log: PathBuf,
        #[arg(long)]
        pack: PathBuf,
        /// Simulator exit status that produced the log.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        exit_code: i32,
    },
    /// Check .sva files and print positioned diagnostics.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Tabulate finished runs.
    ///
    /// #Prompts counts the initial generation plus each repair prompt.
    /// SVA Gen. Time is the wall time of the initial generation call.
    /// Sim. Time is the simulator-reported time of the last simulation.
    /// The raw error rate is the share of initially generated assertions that
    /// a syntax or simulation verdict cited or that a repair retired.
    Report {
        /// Artifact bundle directories (each holding trace.json).
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {{
        let _ = writeln!($w, $($arg)*);
    }};
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut io = Io { out, err };
    match &cli.command {
        Command::Format {
            input,
            label_map,
            design,
        } => format_cmd(&cli, input.as_deref(), label_map.as_deref(), design.as_deref(), &mut io),
        Command::Generate => generate_cmd(&cli, &mut io),
        Command::Triage { log, pack, exit_code } => triage_cmd(&cli, log, pack, *exit_code, &mut io),
        Command::Lint { files } => lint_cmd(files, &mut io),
        Command::Report { bundles, format } => report_cmd(bundles, *format, &mut io),
    }
}

fn format_cmd(cli: &Cli, input: Option<&Path>, label_map: Option<&Path>, design: Option<&str>, io: &mut Io<'_>) -> i32 {
    let result = (|| -> Result<(String, String), String> {
        let config = cli.config.as_deref().map(RunConfig::load).transpose().map_err(|e| e.to_string())?;
        let (spec, name) = match (input, &config) {
            (Some(path), _) => {
                let name = design
                    .map(str::to_owned)
                    .or_else(|| config.as_ref().map(|c| c.design_name.clone()))
                    .ok_or("--design is required without --config")?;
                let map = match label_map {
                    Some(p) => {
                        let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                        let v: serde_json::Value =
                            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?;
                        LabelMap::from_json(&v).map_err(|e| e.to_string())?
                    }
                    None => config
                        .as_ref()
                        .and_then(|c| c.label_map.clone())
                        .ok_or("--label-map is required without --config")?,
                };
                let doc = SpecDocument::read(path, &name).map_err(|e| e.to_string())?;
                let ex = extract(&doc).map_err(|e| e.to_string())?;
                (to_formatted(&ex, &map).map_err(|e| e.to_string())?, name)
            }
            (None, Some(c)) => (c.load_spec().map_err(|e| e.to_string())?, c.design_name.clone()),
            (None, None) => return Err("give a specification document or --config".into()),
        };
        Ok((serialize_spec(&spec), name))
    })();
    match result {
        Ok((text, name)) => match &cli.out {
            Some(dir) => {
                let path = dir.join(format!("{name}.spec.json"));
                if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(&path, &text)) {
                    say!(io.err, "error: {}: {e}", path.display());
                    return EXIT_USAGE;
                }
                say!(io.out, "{}", path.display());
                EXIT_OK
            }
            None => {
                let _ = write!(io.out, "{text}");
                EXIT_OK
            }
        },
        Err(e) => {
            say!(io.err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn generate_cmd(cli: &Cli, io: &mut Io<'_>) -> i32 {
    let Some(path) = &cli.config else {
        say!(io.err, "error: generate needs --config <path>");
        return EXIT_USAGE;
    };
    let mut config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    let artifacts = match run_pipeline(&config) {
        Ok(a) => a,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let trace = &artifacts.trace;
    if cli.verbose {
        for r in &trace.records {
            say!(io.err, "iter {:>2} [{:?}] {} assertions: {}", r.n, r.gate, r.suite.len(), r.verdict);
        }
    }
    if let Some(h) = &trace.halt {
        say!(io.err, "halted at iteration {} ({}): {}", h.n, h.stage, h.error);
    }
    let status = match &artifacts.outcome {
        PipelineOutcome::Converged { .. } => "converged",
        PipelineOutcome::ImplementationBugSuspected { .. } => "implementation bug suspected",
        PipelineOutcome::ExhaustedIterations { .. } => "exhausted",
    };
    say!(
        io.out,
        "{}: {status} with {} assertions after {} prompts; artifacts in {}",
        trace.design_name,
        artifacts.outcome.suite().len(),
        trace.prompt_count,
        config.output_dir.display()
    );
    artifacts.outcome.exit_code()
}

fn triage_cmd(cli: &Cli, log: &Path, pack: &Path, exit_code: i32, io: &mut Io<'_>) -> i32 {
    let pack = match PatternPack::load(pack) {
        Ok(p) => p,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = match fs::read(log) {
        Ok(b) => String::from_utf8_lossy(&b).into_owned(),
        Err(e) => {
            say!(io.err, "error: {}: {e}", log.display());
            return EXIT_USAGE;
        }
    };
    let verdict = classify(&parse_log(&text, &pack), exit_code);
    say!(io.out, "{verdict}");
    if cli.verbose {
        for m in verdict.messages() {
            say!(io.out, "  [{}] {}", m.category.as_str(), m.text);
        }
    }
    if verdict == TriageVerdict::NoError {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

fn lint_cmd(files: &[PathBuf], io: &mut Io<'_>) -> i32 {
    let mut code = EXIT_OK;
    for path in files {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                say!(io.err, "error: {}: {e}", path.display());
                return EXIT_USAGE;
            }
        };
        let suite = parse_sva_file(&text, "lint");
        let starts = sva_blocks(&text);
        for ((a, diags), (start, _)) in suite.assertions.iter().zip(suite_diagnostics(&suite)).zip(starts) {
            for d in diags {
                code = EXIT_DIAGNOSTICS;
                say!(io.out, "{}:{}:{}: {}: {}", path.display(), start + d.line - 1, d.column, a.name, d.detail());
            }
        }
    }
    code
}

fn report_cmd(bundles: &[PathBuf], format: ReportFormat, io: &mut Io<'_>) -> i32 {
    let mut reports: Vec<RunReport> = Vec::new();
    for dir in bundles {
        let r = ArtifactBundle::load(dir)
            .map_err(|e| e.to_string())
            .and_then(|b| summarize(&b).map_err(|e| format!("{}: {e}", dir.display())));
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                say!(io.err, "error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    match format {
        ReportFormat::Table => {
            let _ = write!(io.out, "{}", render_table(&reports));
        }
        ReportFormat::Json => {
            say!(io.out, "{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
        }
    }
    EXIT_OK
}
