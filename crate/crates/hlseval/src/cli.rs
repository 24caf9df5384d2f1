// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 invalid input or a
//! rejected construction result.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hlseval_core::files::DESCRIPTION_FILE;
use hlseval_core::prompts::{EditTask, GenerationOptions};

use crate::case::{discover_cases, load_all, load_case, BenchmarkCase, CaseError};
use crate::construct::{self, ConstructError, ConstructionInput};
use crate::engine::{emit_trace, Engine, PoolConfig};
use crate::evaluator::{self, EditingEvaluator, EvalError, EvalSettings, Evaluator, GenerationEvaluator};
use crate::llm::{LlmError, Model, ModelConfig, MOCK_ENDPOINT};
use crate::report::{build_tables, emit_report, ReportFormat, TableOptions};
use crate::toolchain::{auto_find_vitis_hls, LocalCompiler, MockToolchain, Timeouts, ToolError, ToolchainBackend, VendorHls};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const BUNDLED_DESIGNS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/designs");

#[derive(Debug, Parser)]
#[command(name = "hlseval", version, about = "Evaluate LLMs on high-level synthesis design tasks")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an evaluation.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// LLM-aided benchmark construction.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Recompute pass@k tables from the records of a run.
    Report(ReportArgs),
    /// List and validate the cases under a designs root.
    Cases(CasesArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Kernel generation from description, header, and testbench.
    Gen(GenArgs),
    /// Refactoring of an existing kernel.
    Edit(EditArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: EvalArgs,
    /// Leave the testbench out of the prompt.
    #[arg(long)]
    pub hide_testbench: bool,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    /// loop-labels, fixed-point, dataflow, or tiling.
    #[arg(long, value_parser = parse_task)]
    pub task: EditTask,
    /// Only evaluate cases tagged `edit:<task>`.
    #[arg(long)]
    pub strict_tags: bool,
    #[command(flatten)]
    pub common: EvalArgs,
}

fn parse_task(s: &str) -> Result<EditTask, String> {
    s.parse().map_err(|e: hlseval_core::prompts::UnknownTask| e.to_string())
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Root directory of benchmark cases.
    #[arg(long, env = "HLSEVAL_DESIGNS", default_value = BUNDLED_DESIGNS)]
    pub designs: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub designs: DesignArgs,
    /// Only these cases (repeatable or comma-separated).
    #[arg(long = "case", value_delimiter = ',')]
    pub cases: Vec<String>,
    /// Only cases carrying this tag.
    #[arg(long)]
    pub tag: Option<String>,
    /// Output root; the run directory is `<out>/<run-id>`.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Defaults to the current UTC time.
    #[arg(long)]
    pub run_id: Option<String>,
    /// Keep samples that already have a record.
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub pools: PoolArgs,
    #[command(flatten)]
    pub tools: ToolArgs,
    /// Trace CSV path; defaults to `<run dir>/trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model id (repeatable). `mock` selects the scripted mock.
    #[arg(long = "model", default_value = MOCK_ENDPOINT)]
    pub models: Vec<String>,
    /// TOML file with `[[model]]` tables of model settings.
    #[arg(long)]
    pub models_file: Option<PathBuf>,
    /// OpenAI-compatible base URL for non-mock models.
    #[arg(long, env = "HLSEVAL_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Environment variable that holds the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    pub api_key_env: String,
    /// JSON response script for the mock model.
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
    #[arg(long = "n", default_value_t = 5)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0.7)]
    pub temperature: f64,
    #[arg(long, default_value_t = 4096)]
    pub max_tokens: u32,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    /// Seconds.
    #[arg(long, default_value_t = 300.0)]
    pub request_timeout: f64,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Evaluation driver threads.
    #[arg(long, default_value_t = 16)]
    pub jobs: usize,
    #[arg(long, default_value_t = 4)]
    pub jobs_llm: usize,
    #[arg(long, default_value_t = 8)]
    pub jobs_csim: usize,
    #[arg(long, default_value_t = 8)]
    pub jobs_synth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CsimBackendArg {
    Local,
    Vendor,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthBackendArg {
    /// The vendor tool if it can be found, else no synthesis.
    Auto,
    Vendor,
    Mock,
    None,
}

#[derive(Debug, Args)]
pub struct ToolArgs {
    #[arg(long, value_enum, default_value_t = CsimBackendArg::Local)]
    pub csim_backend: CsimBackendArg,
    #[arg(long, value_enum, default_value_t = SynthBackendArg::Auto)]
    pub synth_backend: SynthBackendArg,
    /// Path to `vitis_hls`; searched in $XILINX_HLS and PATH otherwise.
    #[arg(long)]
    pub vitis_hls: Option<PathBuf>,
    /// Target part for the vendor tool.
    #[arg(long)]
    pub part: Option<String>,
    /// Clock period in ns for the vendor tool.
    #[arg(long)]
    pub clock: Option<f64>,
    /// C++ compiler for the local backend (defaults to $CXX or g++).
    #[arg(long)]
    pub cxx: Option<PathBuf>,
    /// Seconds.
    #[arg(long, default_value_t = 120.0)]
    pub timeout_compile: f64,
    #[arg(long, default_value_t = 60.0)]
    pub timeout_run: f64,
    #[arg(long, default_value_t = 1800.0)]
    pub timeout_synth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => ReportFormat::Markdown,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ConstructCommand {
    /// List the sub-functions of the top function.
    Hierarchy(ConstructArgs),
    /// Write a structured kernel description.
    Description(ConstructArgs),
    /// Write and validate a self-checking testbench.
    Testbench(ConstructArgs),
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Source files (repeatable).
    #[arg(long = "src", required = true)]
    pub sources: Vec<PathBuf>,
    /// Top-level function.
    #[arg(long)]
    pub top: String,
    /// Existing description to include in the prompt.
    #[arg(long)]
    pub description: Option<PathBuf>,
    /// Data files the testbench reads (repeatable).
    #[arg(long = "data")]
    pub data: Vec<PathBuf>,
    /// Directory receiving `.staging/`; defaults to the first source's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the accepted output into the case directory.
    #[arg(long)]
    pub promote: bool,
    /// Let --promote overwrite an existing file.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Backend validating generated testbenches.
    #[arg(long, value_enum, default_value_t = CsimBackendArg::Local)]
    pub backend: CsimBackendArg,
    #[arg(long)]
    pub cxx: Option<PathBuf>,
    #[arg(long)]
    pub vitis_hls: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub run_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
    pub format: FormatArg,
    /// Second k column (defaults to the per-case sample count).
    #[arg(long)]
    pub k: Option<u32>,
    /// Estimate each case with its own sample count.
    #[arg(long)]
    pub allow_mixed_n: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CasesArgs {
    #[command(flatten)]
    pub designs: DesignArgs,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(m: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: m.to_string(),
        }
    }

    fn input(m: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: m.to_string(),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Config(_) => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<ToolError> for CliError {
    fn from(e: ToolError) -> Self {
        match e {
            ToolError::Config(_) | ToolError::Unsupported { .. } => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<CaseError> for CliError {
    fn from(e: CaseError) -> Self {
        CliError::input(e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => m.into(),
            EvalError::Tool(t) => t.into(),
            EvalError::Drivers { .. } => CliError::config(e),
            other => CliError::input(other),
        }
    }
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> Self {
        match e {
            ConstructError::Model(m) => m.into(),
            ConstructError::Tool(t) => t.into(),
            ConstructError::Parse { error, raw } => CliError::input(format!(
                "could not parse the model response: {error}\n--- response ---\n{raw}"
            )),
            other => CliError::input(other),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Normal output goes to `out`, diagnostics to stderr.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

/// Runs an already parsed command line.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Eval(EvalCommand::Gen(a)) => {
            let ev = GenerationEvaluator {
                options: GenerationOptions {
                    include_testbench: !a.hide_testbench,
                },
            };
            cmd_eval(&a.common, &ev, None, out)
        }
        Command::Eval(EvalCommand::Edit(a)) => {
            let ev = EditingEvaluator { task: a.task };
            let strict = a.strict_tags.then(|| a.task.applicability_tag());
            cmd_eval(&a.common, &ev, strict, out)
        }
        Command::Construct(c) => cmd_construct(c, out),
        Command::Report(a) => cmd_report(&a, out),
        Command::Cases(a) => cmd_cases(&a, out),
    }
}

fn w(out: &mut dyn Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
}

fn timeouts(t: &ToolArgs) -> Result<Timeouts, CliError> {
    let secs = |v: f64, name: &str| {
        Duration::try_from_secs_f64(v)
            .ok()
            .filter(|d| !d.is_zero())
            .ok_or_else(|| CliError::config(format!("--timeout-{name} must be positive")))
    };
    Ok(Timeouts {
        compile: secs(t.timeout_compile, "compile")?,
        run: secs(t.timeout_run, "run")?,
        synth: secs(t.timeout_synth, "synth")?,
    })
}

fn local_backend(cxx: Option<&PathBuf>, timeouts: Timeouts) -> ToolchainBackend {
    let mut b = LocalCompiler {
        timeouts,
        ..Default::default()
    };
    if let Some(c) = cxx {
        b.cxx = c.clone();
    }
    ToolchainBackend::LocalCompiler(b)
}

fn vendor_backend(t: &ToolArgs, timeouts: Timeouts) -> Result<ToolchainBackend, CliError> {
    let binary = t
        .vitis_hls
        .clone()
        .or_else(auto_find_vitis_hls)
        .ok_or_else(|| CliError::config("vitis_hls not found; pass --vitis-hls or set XILINX_HLS"))?;
    if !binary.is_file() {
        return Err(CliError::config(format!("{} is not a file", binary.display())));
    }
    let mut v = VendorHls::new(binary);
    v.part = t.part.clone();
    v.clock_period_ns = t.clock;
    v.timeouts = timeouts;
    Ok(ToolchainBackend::VendorHls(v))
}

fn backends(t: &ToolArgs) -> Result<(ToolchainBackend, Option<ToolchainBackend>), CliError> {
    let to = timeouts(t)?;
    let csim = match t.csim_backend {
        CsimBackendArg::Local => local_backend(t.cxx.as_ref(), to),
        CsimBackendArg::Vendor => vendor_backend(t, to)?,
        CsimBackendArg::Mock => ToolchainBackend::Mock(MockToolchain),
    };
    let synth = match t.synth_backend {
        SynthBackendArg::Vendor => Some(vendor_backend(t, to)?),
        SynthBackendArg::Mock => Some(ToolchainBackend::Mock(MockToolchain)),
        SynthBackendArg::None => None,
        SynthBackendArg::Auto => match vendor_backend(t, to) {
            Ok(b) => Some(b),
            Err(_) => {
                eprintln!("notice: vitis_hls not found; synthesis is skipped and Can Synth will read 0");
                None
            }
        },
    };
    Ok((csim, synth))
}

#[derive(Debug, serde::Deserialize)]
struct ModelsFile {
    model: Vec<ModelConfig>,
}

/// Model configurations from flags, or from `--models-file` when given.
pub fn model_configs(a: &ModelArgs) -> Result<Vec<ModelConfig>, CliError> {
    if let Some(path) = &a.models_file {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let file: ModelsFile = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        return Ok(file.model);
    }
    Ok(a.models
        .iter()
        .map(|id| {
            let mock = id == MOCK_ENDPOINT;
            ModelConfig {
                model_id: id.clone(),
                endpoint: if mock {
                    MOCK_ENDPOINT.into()
                } else {
                    a.endpoint.clone().unwrap_or_else(|| "https://api.openai.com/v1".into())
                },
                api_key_env: (!mock).then(|| a.api_key_env.clone()),
                temperature: a.temperature,
                n_samples: a.n_samples,
                max_tokens: a.max_tokens,
                request_timeout: a.request_timeout,
                max_retries: a.max_retries,
                mock_script: if mock { a.mock_script.clone() } else { None },
                ..Default::default()
            }
        })
        .collect())
}

fn build_models(a: &ModelArgs) -> Result<Vec<Model>, CliError> {
    let configs = model_configs(a)?;
    if configs.iter().any(|c| c.is_mock() && c.mock_script.is_none()) {
        eprintln!("notice: the mock model has no --mock-script; every request will fail");
    }
    configs
        .into_iter()
        .map(|c| Model::from_config(c).map_err(CliError::from))
        .collect()
}

fn select_cases(a: &EvalArgs, strict_tag: Option<String>) -> Result<Vec<BenchmarkCase>, CliError> {
    let all = load_all(&a.designs.designs)?;
    let mut cases = all.clone();
    if !a.cases.is_empty() {
        let names: Vec<&str> = all.iter().map(|c| c.name.as_str()).collect();
        for want in &a.cases {
            if !names.contains(&want.as_str()) {
                return Err(CliError::input(format!(
                    "unknown case `{want}`; available: {}",
                    names.join(", ")
                )));
            }
        }
        cases.retain(|c| a.cases.contains(&c.name));
    }
    if let Some(tag) = &a.tag {
        cases.retain(|c| c.has_tag(tag));
    }
    if let Some(tag) = strict_tag {
        cases.retain(|c| {
            let keep = c.has_tag(&tag);
            if !keep {
                eprintln!("notice: skipping {}: not tagged {tag}", c.name);
            }
            keep
        });
    }
    if cases.is_empty() {
        return Err(CliError::input("no cases selected"));
    }
    Ok(cases)
}

fn cmd_eval(a: &EvalArgs, ev: &dyn Evaluator, strict_tag: Option<String>, out: &mut dyn Write) -> Result<i32, CliError> {
    // Everything is resolved before any work starts.
    let pools = PoolConfig {
        n_jobs: a.pools.jobs,
        n_jobs_llm: a.pools.jobs_llm,
        n_jobs_csim: a.pools.jobs_csim,
        n_jobs_synth: a.pools.jobs_synth,
    };
    pools.validate().map_err(CliError::config)?;
    let models = build_models(&a.model)?;
    let (csim, synth) = backends(&a.tools)?;
    let cases = select_cases(a, strict_tag)?;
    let run_id = a
        .run_id
        .clone()
        .unwrap_or_else(|| chrono::Utc::now().format("%Y%m%d-%H%M%S").to_string());
    if run_id.is_empty() || evaluator::sanitize(&run_id) != run_id {
        return Err(CliError::input(format!("run id `{run_id}` must be a plain file name")));
    }
    let settings = EvalSettings {
        output_root: a.out.clone(),
        run_id,
        resume: a.resume,
        csim: Arc::new(csim),
        synth: synth.map(Arc::new),
    };

    let engine = Engine::new(pools).map_err(CliError::config)?;
    let result = evaluator::evaluate_designs(&engine, ev, &cases, &models, &settings);
    engine.shutdown();
    let run_dir = settings.run_dir();
    let trace_path = a.trace.clone().unwrap_or_else(|| run_dir.join("trace.csv"));
    emit_trace(&engine.trace(), &trace_path).map_err(|e| CliError::input(format!("{}: {e}", trace_path.display())))?;
    let run = result?;

    let tables = build_tables(&run.records, TableOptions::default()).map_err(CliError::input)?;
    let report = emit_report(&tables, a.format.into());
    let ext = match a.format {
        FormatArg::Markdown => "md",
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
    };
    let report_path = run_dir.join(format!("report.{ext}"));
    fs::write(&report_path, &report).map_err(|e| CliError::input(format!("{}: {e}", report_path.display())))?;
    w(out, &report);
    eprintln!(
        "{} records in {} (trace: {})",
        run.records.len(),
        run_dir.display(),
        trace_path.display()
    );
    Ok(EXIT_OK)
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let records = evaluator::load_records(&a.run_dir)?;
    if records.is_empty() {
        return Err(CliError::input(format!("no records under {}", a.run_dir.display())));
    }
    let tables = build_tables(
        &records,
        TableOptions {
            k: a.k,
            allow_mixed_n: a.allow_mixed_n,
        },
    )
    .map_err(CliError::input)?;
    let text = emit_report(&tables, a.format.into());
    match &a.output {
        Some(p) => fs::write(p, &text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        None => w(out, &text),
    }
    Ok(EXIT_OK)
}

fn cmd_cases(a: &CasesArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let dirs = discover_cases(&a.designs.designs)?;
    let mut code = EXIT_OK;
    for dir in dirs {
        match load_case(&dir) {
            Ok(c) => w(
                out,
                &format!(
                    "{}\ttop={}\tkernels={}\ttags={}\n",
                    c.name,
                    c.top_name,
                    c.kernel_files.len(),
                    c.tags.join(",")
                ),
            ),
            Err(e) => {
                eprintln!("invalid: {e}");
                code = EXIT_INPUT;
            }
        }
    }
    Ok(code)
}

fn construct_model(a: &ModelArgs) -> Result<Model, CliError> {
    let mut models = build_models(a)?;
    if models.len() != 1 {
        return Err(CliError::config("construction takes exactly one model"));
    }
    Ok(models.remove(0))
}

fn cmd_construct(cmd: ConstructCommand, out: &mut dyn Write) -> Result<i32, CliError> {
    let (kind, a) = match cmd {
        ConstructCommand::Hierarchy(a) => ("hierarchy", a),
        ConstructCommand::Description(a) => ("description", a),
        ConstructCommand::Testbench(a) => ("testbench", a),
    };
    let model = construct_model(&a.model)?;
    let existing = match &a.description {
        Some(p) => Some(fs::read_to_string(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let input = ConstructionInput {
        source_files: a.sources.clone(),
        top_name: a.top.clone(),
        existing_description: existing,
        data_files: a.data.clone(),
    };
    for p in a.sources.iter().chain(&a.data) {
        if !p.is_file() {
            return Err(CliError::input(format!("{} is not a file", p.display())));
        }
    }
    let case_dir: PathBuf = a
        .out
        .clone()
        .or_else(|| a.sources[0].parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));

    let mut staged: BTreeMap<&str, PathBuf> = BTreeMap::new();
    match kind {
        "hierarchy" => {
            let h = construct::extract_hierarchy(&input, &model)?;
            let text = construct::hierarchy_markdown(&h.subcomponents);
            staged.insert("hierarchy", construct::stage(&case_dir, construct::HIERARCHY_FILE, &text)?);
            if h.subcomponents.kept.is_empty() {
                w(out, "none\n");
            } else {
                w(out, &text);
            }
        }
        "description" => {
            let d = construct::generate_description(&input, &model)?;
            staged.insert("description", construct::stage(&case_dir, DESCRIPTION_FILE, &d.description)?);
            w(out, &d.description);
            if a.promote {
                let p = construct::promote(&case_dir, DESCRIPTION_FILE, &d.description, a.force)?;
                eprintln!("promoted to {}", p.display());
            }
        }
        _ => {
            let to = Timeouts::default();
            let backend = match a.backend {
                CsimBackendArg::Local => local_backend(a.cxx.as_ref(), to),
                CsimBackendArg::Mock => ToolchainBackend::Mock(MockToolchain),
                CsimBackendArg::Vendor => {
                    let t = ToolArgs {
                        csim_backend: CsimBackendArg::Vendor,
                        synth_backend: SynthBackendArg::None,
                        vitis_hls: a.vitis_hls.clone(),
                        part: None,
                        clock: None,
                        cxx: None,
                        timeout_compile: to.compile.as_secs_f64(),
                        timeout_run: to.run.as_secs_f64(),
                        timeout_synth: to.synth.as_secs_f64(),
                    };
                    vendor_backend(&t, to)?
                }
            };
            let work = case_dir.join(construct::STAGING_DIR).join("testbench_work");
            let tb = construct::generate_testbench(&input, &model, &backend, &work)?;
            staged.insert("testbench", construct::stage(&case_dir, &tb.filename, &tb.source)?);
            let accepted = tb.accepted();
            let run_code = tb.run_code().map_or("none".to_string(), |c| c.to_string());
            w(
                out,
                &format!(
                    "verdict: {}\ncompile exit: {}\nrun exit: {run_code}\n",
                    if accepted { "accepted" } else { "rejected" },
                    tb.csim.compile.return_code
                ),
            );
            if !accepted {
                eprint!("{}", tb.csim.compile.to_log());
                if let Some(r) = &tb.csim.run {
                    eprint!("{}", r.to_log());
                }
                for (what, path) in &staged {
                    eprintln!("staged {what}: {}", path.display());
                }
                return Ok(EXIT_INPUT);
            }
            if a.promote {
                let p = construct::promote(&case_dir, &tb.filename, &tb.source, a.force)?;
                eprintln!("promoted to {}", p.display());
            }
        }
    }
    for (what, path) in &staged {
        eprintln!("staged {what}: {}", path.display());
    }
    Ok(EXIT_OK)
}
