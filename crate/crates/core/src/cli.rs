//! Command-line front end: `analyze`, `run` and `export-smt`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::absint::{AssertionId, Status};
use crate::callgraph::build_vunit;
use crate::frontend::IntWidth;
use crate::pipeline::{prepare, synthesize, PipelineConfig, PipelineError, Prepared};
use crate::report::{self, ConfigEcho, ProgramReport, ReportDocument, Timing, ToolInfo, SCHEMA_VERSION};
use crate::specs::ContractEnv;
use crate::synthesis::{Generator, OracleGenerator, SynthesisConfig, Verdict};
use crate::verifier::{smt, DischargeConfig, SmtSolver, Verifier};

pub const REPORT_SCHEMA: &str = include_str!("../../../docs/report.schema.json");

#[derive(Debug, Parser)]
#[command(name = "preguss", version, about = "Runtime-error guided contract synthesis for MiniC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the interval analysis and print the instrumented source.
    Analyze(CommonArgs),
    /// Run the whole pipeline and print the annotated source.
    Run(CommonArgs),
    /// Write one SMT-LIB file per condition of the selected units.
    ExportSmt(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Oracle,
    Llm,
}

fn parse_width(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(w @ (8 | 16 | 32)) => Ok(w),
        _ => Err(format!("width must be 8, 16 or 32, got `{s}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// MiniC source files, each analyzed as a separate program.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 32, value_parser = parse_width)]
    pub width: u32,
    #[arg(long, value_enum, default_value_t = Backend::Oracle)]
    pub generator: Backend,
    /// Generator calls per phase and unit.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_iters: u32,
    /// Where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the verification queue as JSON on stdout instead of the source.
    #[arg(long)]
    pub dump_queue: bool,
    #[arg(long)]
    pub continue_on_alert: bool,
    /// Keep every direct callee in the slices.
    #[arg(long)]
    pub no_dependency_filter: bool,
    /// Store full generator requests and responses in the report.
    #[arg(long)]
    pub save_transcripts: bool,
    /// Write the annotated source here instead of stdout.
    #[arg(long)]
    pub annotated: Option<PathBuf>,
    /// Ask z3 or cvc5 (found in PATH) when the built-in search is undecided.
    #[arg(long)]
    pub smt: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 32, value_parser = parse_width)]
    pub width: u32,
    /// Assertion ids to export, e.g. `ovf-n9`. Repeatable.
    #[arg(long = "assertion")]
    pub assertions: Vec<String>,
    /// Export every queued unit.
    #[arg(long, conflicts_with = "assertions")]
    pub all: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_dependency_filter: bool,
    /// Export without contracts instead of running the oracle pipeline first.
    #[arg(long)]
    pub bare: bool,
}

/// Settings of one `analyze` or `run` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub width: IntWidth,
    pub generator: Backend,
    pub max_iters: u32,
    pub dump_queue: bool,
    pub continue_on_alert: bool,
    pub dependency_filter: bool,
    pub save_transcripts: bool,
    pub smt: bool,
    pub report: Option<PathBuf>,
    pub annotated: Option<PathBuf>,
}

impl From<&CommonArgs> for RunConfig {
    fn from(a: &CommonArgs) -> Self {
        RunConfig {
            inputs: a.inputs.clone(),
            width: IntWidth::from_bits(a.width).expect("validated by clap"),
            generator: a.generator,
            max_iters: a.max_iters,
            dump_queue: a.dump_queue,
            continue_on_alert: a.continue_on_alert,
            dependency_filter: !a.no_dependency_filter,
            save_transcripts: a.save_transcripts,
            smt: a.smt,
            report: a.report.clone(),
            annotated: a.annotated.clone(),
        }
    }
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>) -> RunConfig {
        RunConfig {
            inputs,
            width: IntWidth::W32,
            generator: Backend::Oracle,
            max_iters: 5,
            dump_queue: false,
            continue_on_alert: false,
            dependency_filter: true,
            save_transcripts: false,
            smt: false,
            report: None,
            annotated: None,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            width: self.width,
            synthesis: SynthesisConfig {
                max_iters: self.max_iters,
                continue_on_alert: self.continue_on_alert,
                save_transcripts: self.save_transcripts,
            },
            discharge: DischargeConfig {
                smt: if self.smt { SmtSolver::detect() } else { None },
                ..DischargeConfig::default()
            },
            dependency_filter: self.dependency_filter,
            ..PipelineConfig::default()
        }
    }

    fn echo(&self, generator: String) -> ConfigEcho {
        ConfigEcho {
            width: self.width.bits(),
            generator,
            max_iters: self.max_iters,
            dump_queue: self.dump_queue,
            continue_on_alert: self.continue_on_alert,
            dependency_filter: self.dependency_filter,
            save_transcripts: self.save_transcripts,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Pipeline { path: String, source: PipelineError },
    #[error("report does not match the schema: {0}")]
    Schema(String),
    #[error("{0}")]
    Usage(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Every schema violation of `doc`, one message per error.
pub fn validate_report(doc: &Value) -> Result<(), Vec<String>> {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).expect("shipped schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn emit_report(cfg: &RunConfig, doc: &ReportDocument) -> Result<(), CliError> {
    let value = serde_json::to_value(doc).expect("report serializes");
    validate_report(&value).map_err(|e| CliError::Schema(e.join("; ")))?;
    if let Some(path) = &cfg.report {
        let text = serde_json::to_string_pretty(&value).expect("report serializes");
        write(path, &(text + "\n"))?;
    }
    Ok(())
}

fn emit_text(cfg: &RunConfig, text: &str, queue: Vec<Value>) -> Result<(), CliError> {
    if let Some(path) = &cfg.annotated {
        write(path, text)?;
    }
    let mut out = std::io::stdout().lock();
    if cfg.dump_queue {
        let q = if queue.len() == 1 { queue[0].clone() } else { Value::Array(queue) };
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&q).expect("queue serializes"));
    } else if cfg.annotated.is_none() {
        let _ = write!(out, "{text}");
    }
    Ok(())
}

fn load(cfg: &RunConfig, path: &Path) -> Result<(String, String, Prepared), CliError> {
    let source = read(path)?;
    let name = path.display().to_string();
    let p = prepare(&name, &source, &cfg.pipeline()).map_err(|source| CliError::Pipeline {
        path: name.clone(),
        source,
    })?;
    Ok((name, source, p))
}

fn document(cfg: &RunConfig, command: &str, generator: String, programs: Vec<ProgramReport>, started: Instant) -> ReportDocument {
    ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        tool: ToolInfo::default(),
        command: command.into(),
        generated_at: Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        timing: Some(Timing {
            elapsed_ms: started.elapsed().as_millis() as u64,
        }),
        config: cfg.echo(generator),
        programs,
    }
}

fn analyze_inner(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let mut programs = Vec::new();
    let mut text = String::new();
    let mut queues = Vec::new();
    let mut alarms = 0;
    for path in &cfg.inputs {
        let (name, source, p) = load(cfg, path)?;
        alarms += p.analysis.assertions.iter().filter(|a| a.status == Status::Alarm).count();
        text.push_str(&report::instrumented_source(&p));
        queues.push(report::queue_json(&p));
        programs.push(report::program_report(&name, &source, &p, None, cfg.dump_queue));
    }
    emit_report(cfg, &document(cfg, "analyze", "none".into(), programs, started))?;
    emit_text(cfg, &text, queues)?;
    eprintln!("{alarms} alarm(s)");
    Ok(if alarms == 0 { 0 } else { 1 })
}

fn generator(cfg: &RunConfig) -> Result<Box<dyn Generator>, CliError> {
    match cfg.generator {
        Backend::Oracle => Ok(Box::new(OracleGenerator::new())),
        #[cfg(feature = "llm")]
        Backend::Llm => {
            let c = crate::synthesis::llm::LlmConfig::from_env().map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Box::new(crate::synthesis::llm::LlmGenerator::new(c)))
        }
        #[cfg(not(feature = "llm"))]
        Backend::Llm => Err(CliError::Usage("built without the `llm` feature".into())),
    }
}

fn run_inner(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let mut gen = generator(cfg)?;
    let mut programs = Vec::new();
    let mut text = String::new();
    let mut queues = Vec::new();
    let mut clean = true;
    for path in &cfg.inputs {
        let (name, source, p) = load(cfg, path)?;
        let r = synthesize(&p, gen.as_mut(), &cfg.pipeline()).map_err(|source| CliError::Pipeline {
            path: name.clone(),
            source,
        })?;
        for v in r.verdicts.iter().filter(|v| v.verdict != Verdict::Certified) {
            eprintln!("{name}:{}:{}: {:?} {} `{}`", v.line, v.column, v.verdict, v.assertion, v.predicate);
        }
        clean &= r.all_certified();
        text.push_str(&report::annotated_source(&p.tp, &r.contracts));
        queues.push(report::queue_json(&p));
        programs.push(report::program_report(&name, &source, &p, Some(&r), cfg.dump_queue));
    }
    emit_report(cfg, &document(cfg, "run", gen.id(), programs, started))?;
    emit_text(cfg, &text, queues)?;
    Ok(if clean { 0 } else { 1 })
}

pub fn cmd_analyze(cfg: &RunConfig) -> i32 {
    analyze_inner(cfg).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        2
    })
}

pub fn cmd_run(cfg: &RunConfig) -> i32 {
    run_inner(cfg).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        2
    })
}

/// File name for a condition id such as `ovf-n9/target`.
pub fn smt_file_name(vc_id: &str) -> String {
    format!("{}.smt2", vc_id.replace('/', "__"))
}

fn export_inner(a: &ExportArgs) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig {
        width: IntWidth::from_bits(a.width).expect("validated by clap"),
        dependency_filter: !a.no_dependency_filter,
        continue_on_alert: true,
        ..RunConfig::new(vec![a.input.clone()])
    };
    let (_, _, p) = load(&cfg, &a.input)?;
    let contracts = if a.bare {
        ContractEnv::default()
    } else {
        synthesize(&p, &mut OracleGenerator::new(), &cfg.pipeline())
            .map_err(|source| CliError::Pipeline {
                path: a.input.display().to_string(),
                source,
            })?
            .contracts
    };
    let selected: Vec<AssertionId> = if a.all {
        p.queue.iter().map(|v| v.target.id.clone()).collect()
    } else {
        a.assertions.iter().map(|s| AssertionId(s.clone())).collect()
    };
    let verifier = Verifier::default();
    let mut written = Vec::new();
    if selected.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(&a.out).map_err(|source| CliError::Io {
        path: a.out.display().to_string(),
        source,
    })?;
    for id in selected {
        let mut unit = match p.queue.iter().find(|v| v.target.id == id) {
            Some(v) => v.clone(),
            None => {
                let Some(asr) = p.assertions.iter().find(|x| x.id == id) else {
                    return Err(CliError::Usage(format!("unknown assertion `{id}`")));
                };
                build_vunit(asr, &p.tp, &p.call_graph, &ContractEnv::default(), 0)
            }
        };
        unit.contracts = contracts.clone();
        for vc in verifier.gen_vcs(&p.tp, &unit, &[]) {
            let comment = format!("{}\n{}", vc.id, vc.description);
            let text = smt::to_smtlib(&vc.formula(), p.tp.width, &comment);
            let path = a.out.join(smt_file_name(&vc.id));
            write(&path, &text)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn cmd_export_smt(a: &ExportArgs) -> i32 {
    match export_inner(a) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn main_with(cli: Cli) -> i32 {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(&RunConfig::from(a)),
        Command::Run(a) => cmd_run(&RunConfig::from(a)),
        Command::ExportSmt(a) => cmd_export_smt(a),
    }
}
