// SPDX-License-Identifier: Apache-2.0

//! Zero-shot evaluators: prompt a model, extract code from each sample, run
//! the tools, score the four gated metrics, and persist everything.
//!
//! Run directory layout:
//!
//! ```text
//! <out>/<run_id>/run.json
//! <out>/<run_id>/<case>/<model>/<task>/<sample_idx>/
//!     response.txt  files/  design/  work/{compile,run,synth}/
//!     compile.log  run.log  synth.log  record.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hlseval_core::extract::{parse_output, FileMap, OutputKind};
use hlseval_core::files::{classify, FileRole};
use hlseval_core::prompts::{edit_prompt, generation_prompt, EditTask, GenerationOptions, TaskId, TemplateId};
use hlseval_core::score::{SampleFlags, StageCodes};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::case::{case_to_design, BenchmarkCase, CaseError, Design};
use crate::engine::{Engine, PoolConfig, PoolKind, TaskError, TaskHandle};
use crate::llm::{LlmError, Model, ModelConfig};
use crate::toolchain::{BackendKind, CsimOutcome, Stage, SynthOutcome, SynthReport, ToolError, ToolExecution, ToolchainBackend};

pub const RECORD_FILE: &str = "record.json";
pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub case_name: String,
    pub model_id: String,
    pub task_id: TaskId,
    pub sample_idx: usize,
    pub raw_response: String,
    /// Empty unless `parseable`.
    pub extracted_files: FileMap,
    pub parseable: bool,
    pub compilable: bool,
    pub runnable: bool,
    pub synthesizable: bool,
    /// Stage executions in order: compile, run, synth. Workdirs are relative
    /// to the run directory.
    pub executions: Vec<ToolExecution>,
    pub synth_report: Option<SynthReport>,
    pub error_note: Option<String>,
    /// RFC 3339 wall-clock time the record was written.
    pub finished_at: String,
}

impl SampleRecord {
    pub fn flags(&self) -> SampleFlags {
        SampleFlags {
            parseable: self.parseable,
            compilable: self.compilable,
            runnable: self.runnable,
            synthesizable: self.synthesizable,
        }
    }

    /// The record with run-specific noise removed: timestamps, durations,
    /// and workdir paths.
    pub fn normalized(&self) -> SampleRecord {
        let mut r = self.clone();
        r.finished_at.clear();
        for e in &mut r.executions {
            e.duration = 0.0;
            e.workdir = PathBuf::new();
        }
        r
    }

    /// SHA-256 over the normalized record. Equal hashes mean equal outcomes.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(&self.normalized()).expect("record serializes");
        hex::encode(Sha256::digest(json))
    }

    fn sort_key(&self) -> (String, String, TaskId, usize) {
        (self.case_name.clone(), self.model_id.clone(), self.task_id, self.sample_idx)
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] LlmError),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Task(#[from] TaskError),
    #[error("{count} evaluation driver(s) failed; first: {first}")]
    Drivers { count: usize, first: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A returned file set that cannot be turned into a design. Scored like a
/// parse failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaterializeError {
    #[error("no returned kernel matches the case's kernel files {expected:?} (got {got:?})")]
    NoKernelMatch { expected: Vec<String>, got: Vec<String> },
    #[error("returned files {got:?} do not match the case's files {expected:?}")]
    FileSetMismatch { expected: Vec<String>, got: Vec<String> },
}

/// What distinguishes one evaluation task from another.
pub trait Evaluator: Send + Sync {
    fn task(&self) -> TaskId;
    fn output_kind(&self) -> OutputKind;
    fn build_prompt(&self, case: &BenchmarkCase) -> Result<String, EvalError>;
    /// The replacement map applied to the case for a parsed sample.
    fn replacements(&self, case: &BenchmarkCase, files: &FileMap) -> Result<BTreeMap<String, String>, MaterializeError>;
}

/// Generate the kernel from its description, header, and testbench.
#[derive(Debug, Clone, Default)]
pub struct GenerationEvaluator {
    pub options: GenerationOptions,
}

impl Evaluator for GenerationEvaluator {
    fn task(&self) -> TaskId {
        TaskId::Generation
    }

    fn output_kind(&self) -> OutputKind {
        OutputKind::Generation
    }

    fn build_prompt(&self, case: &BenchmarkCase) -> Result<String, EvalError> {
        let texts = case.read_texts()?;
        Ok(generation_prompt(&texts.sources(&case.description), self.options).rendered())
    }

    /// Returned kernels replace the case kernels of the same name. When the
    /// case has one kernel and the response one kernel block, that block
    /// replaces it whatever its name. Everything else is ignored.
    fn replacements(&self, case: &BenchmarkCase, files: &FileMap) -> Result<BTreeMap<String, String>, MaterializeError> {
        let expected = case.kernel_names();
        let returned: Vec<&String> = files.keys().filter(|n| classify(n) == FileRole::Kernel).collect();
        let mut out = BTreeMap::new();
        for name in &returned {
            if expected.contains(name) {
                out.insert((*name).clone(), files[*name].clone());
            }
        }
        if out.is_empty() && expected.len() == 1 && returned.len() == 1 {
            out.insert(expected[0].clone(), files[returned[0]].clone());
        }
        if out.is_empty() {
            return Err(MaterializeError::NoKernelMatch {
                expected,
                got: returned.into_iter().cloned().collect(),
            });
        }
        let ignored: Vec<&String> = files
            .keys()
            .filter(|n| !out.contains_key(*n) && !(expected.len() == 1 && returned.len() == 1 && returned[0] == *n))
            .collect();
        if !ignored.is_empty() {
            log::warn!("{}: ignoring returned files {ignored:?}; only kernel sources are replaced", case.name);
        }
        Ok(out)
    }
}

/// Refactor an existing design for one optimization task.
#[derive(Debug, Clone)]
pub struct EditingEvaluator {
    pub task: EditTask,
}

impl Evaluator for EditingEvaluator {
    fn task(&self) -> TaskId {
        TaskId::Edit(self.task)
    }

    fn output_kind(&self) -> OutputKind {
        OutputKind::Edit
    }

    fn build_prompt(&self, case: &BenchmarkCase) -> Result<String, EvalError> {
        let texts = case.read_texts()?;
        Ok(edit_prompt(&texts.sources(&case.description), self.task).rendered())
    }

    fn replacements(&self, case: &BenchmarkCase, files: &FileMap) -> Result<BTreeMap<String, String>, MaterializeError> {
        apply_edit_task(case, files)
    }
}

/// All returned files replace their originals. The returned names must be
/// exactly the case's header, kernel, and testbench names.
pub fn apply_edit_task(case: &BenchmarkCase, files: &FileMap) -> Result<BTreeMap<String, String>, MaterializeError> {
    let mut expected: BTreeSet<String> = case.kernel_names().into_iter().collect();
    expected.insert(case.header_name());
    expected.insert(case.testbench_name());
    let got: BTreeSet<String> = files.keys().cloned().collect();
    if got != expected {
        return Err(MaterializeError::FileSetMismatch {
            expected: expected.into_iter().collect(),
            got: got.into_iter().collect(),
        });
    }
    Ok(files.clone())
}

/// SHA-256 of every prompt template body.
pub fn template_digests() -> BTreeMap<String, String> {
    TemplateId::ALL
        .iter()
        .map(|t| (t.name().to_string(), hex::encode(Sha256::digest(t.body().as_bytes()))))
        .collect()
}

/// Filesystem-safe form of a case or model name.
pub fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    if s.is_empty() || s.chars().all(|c| c == '.') {
        "_".into()
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub output_root: PathBuf,
    pub run_id: String,
    /// Keep samples whose `record.json` already exists.
    pub resume: bool,
    pub csim: Arc<ToolchainBackend>,
    /// `None` skips synthesis; every sample then scores as not synthesizable.
    pub synth: Option<Arc<ToolchainBackend>>,
}

impl EvalSettings {
    pub fn run_dir(&self) -> PathBuf {
        self.output_root.join(&self.run_id)
    }

    pub fn sample_dir(&self, case: &str, model: &str, task: TaskId, idx: usize) -> PathBuf {
        self.run_dir()
            .join(sanitize(case))
            .join(sanitize(model))
            .join(task.as_str())
            .join(idx.to_string())
    }
}

/// Configuration snapshot written to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub task: TaskId,
    pub cases: Vec<String>,
    pub models: Vec<ModelConfig>,
    pub pools: PoolConfig,
    pub csim_backend: BackendKind,
    pub synth_backend: Option<BackendKind>,
    pub template_digests: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub run_id: String,
    pub started_at: String,
    pub config: RunSnapshot,
    pub records: Vec<SampleRecord>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), EvalError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), EvalError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf())
}

/// Per-sample state while it moves through the stages.
struct Pending {
    idx: usize,
    dir: PathBuf,
    raw: String,
    files: FileMap,
    note: Option<String>,
    design: Option<Design>,
    csim: Option<CsimOutcome>,
    synth: Option<SynthOutcome>,
}

fn wait<T>(h: TaskHandle<Result<T, ToolError>>) -> Result<T, EvalError> {
    Ok(h.wait()??)
}

/// Evaluates one (case, model) pair: all samples through all stages.
pub fn evaluate_design(
    engine: &Engine,
    evaluator: &dyn Evaluator,
    case: &BenchmarkCase,
    model: &Model,
    settings: &EvalSettings,
) -> Result<Vec<SampleRecord>, EvalError> {
    let task = evaluator.task();
    let prompt = Arc::new(evaluator.build_prompt(case)?);
    let n = model.config.n_samples;
    let label = |idx: usize| format!("{}/{}/{}/{idx}", case.name, model.id(), task);

    let mut done: Vec<SampleRecord> = Vec::new();
    let mut llm_handles = Vec::new();
    for idx in 0..n {
        let dir = settings.sample_dir(&case.name, model.id(), task, idx);
        let record_path = dir.join(RECORD_FILE);
        if settings.resume && record_path.is_file() {
            let text = fs::read_to_string(&record_path).map_err(io_err(&record_path))?;
            match serde_json::from_str::<SampleRecord>(&text) {
                Ok(r) => {
                    done.push(r);
                    continue;
                }
                Err(e) => log::warn!("{}: unreadable record, re-running: {e}", record_path.display()),
            }
        }
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let (m, p) = (model.clone(), prompt.clone());
        let h = engine.submit(PoolKind::Llm, &label(idx), move || m.complete(&p, idx));
        llm_handles.push((idx, dir, h));
    }

    // Parse and materialize; queue C-simulation.
    let mut pending = Vec::new();
    let mut csim_handles = Vec::new();
    for (idx, dir, h) in llm_handles {
        let mut p = Pending {
            idx,
            dir,
            raw: String::new(),
            files: FileMap::new(),
            note: None,
            design: None,
            csim: None,
            synth: None,
        };
        match h.wait()? {
            Err(e @ LlmError::Config(_)) => return Err(e.into()),
            Err(e) => p.note = Some(format!("model request failed: {e}")),
            Ok(raw) => {
                p.raw = raw;
                match parse_output(&p.raw, evaluator.output_kind()) {
                    Err(e) => p.note = Some(format!("parse failure: {e}")),
                    Ok(files) => match evaluator.replacements(case, &files) {
                        Err(e) => p.note = Some(format!("parse failure: {e}")),
                        Ok(repl) => {
                            for (name, content) in &files {
                                write_file(&p.dir.join("files").join(name), content)?;
                            }
                            p.design = Some(case_to_design(case, &repl, &p.dir.join("design"))?);
                            p.files = files;
                        }
                    },
                }
            }
        }
        write_file(&p.dir.join("response.txt"), &p.raw)?;
        if let Some(design) = p.design.clone() {
            let (backend, work) = (settings.csim.clone(), p.dir.join("work"));
            let h = engine.submit(PoolKind::Csim, &label(idx), move || backend.csim(&design, &work));
            csim_handles.push((pending.len(), h));
        }
        pending.push(p);
    }

    // Synthesis is gated on compilation only.
    let mut synth_handles = Vec::new();
    for (i, h) in csim_handles {
        let outcome = wait(h)?;
        if outcome.compile.succeeded() {
            if let (Some(backend), Some(design)) = (settings.synth.clone(), pending[i].design.clone()) {
                let work = pending[i].dir.join("work");
                let h = engine.submit(PoolKind::Synth, &label(pending[i].idx), move || backend.synth(&design, &work));
                synth_handles.push((i, h));
            }
        }
        pending[i].csim = Some(outcome);
    }
    for (i, h) in synth_handles {
        pending[i].synth = Some(wait(h)?);
    }

    let run_dir = settings.run_dir();
    for p in pending {
        done.push(finish_sample(case, model, task, p, &run_dir)?);
    }
    done.sort_by_key(SampleRecord::sort_key);
    Ok(done)
}

fn finish_sample(case: &BenchmarkCase, model: &Model, task: TaskId, p: Pending, run_dir: &Path) -> Result<SampleRecord, EvalError> {
    let mut executions = Vec::new();
    let mut codes = StageCodes {
        parsed: p.design.is_some(),
        ..Default::default()
    };
    if let Some(cs) = p.csim {
        codes.compile = Some(cs.compile.return_code);
        executions.push(cs.compile);
        if let Some(run) = cs.run {
            codes.run = Some(run.return_code);
            executions.push(run);
        }
    }
    let mut synth_report = None;
    if let Some(sy) = p.synth {
        codes.synth = Some(sy.exec.return_code);
        executions.push(sy.exec);
        synth_report = sy.report;
    }
    for e in &mut executions {
        let log = match e.stage {
            Stage::Compile => "compile.log",
            Stage::Run => "run.log",
            Stage::Synth => "synth.log",
        };
        write_file(&p.dir.join(log), &e.to_log())?;
        e.workdir = relative_to(&e.workdir, run_dir);
    }

    let flags = SampleFlags::from_codes(codes);
    let record = SampleRecord {
        case_name: case.name.clone(),
        model_id: model.id().to_string(),
        task_id: task,
        sample_idx: p.idx,
        raw_response: p.raw,
        extracted_files: p.files,
        parseable: flags.parseable,
        compilable: flags.compilable,
        runnable: flags.runnable,
        synthesizable: flags.synthesizable,
        executions,
        synth_report,
        error_note: p.note,
        finished_at: now(),
    };
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    write_atomic(&p.dir.join(RECORD_FILE), json.as_bytes())?;
    Ok(record)
}

/// Evaluates every case against every model on `engine`.
///
/// Per-sample failures become records. Configuration errors (a model or
/// tool that cannot be used at all) fail the run once every driver has
/// stopped; records already written stay on disk for `--resume`.
pub fn evaluate_designs(
    engine: &Engine,
    evaluator: &dyn Evaluator,
    cases: &[BenchmarkCase],
    models: &[Model],
    settings: &EvalSettings,
) -> Result<EvalRun, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::Input("no cases to evaluate".into()));
    }
    if models.is_empty() {
        return Err(EvalError::Input("no models to evaluate".into()));
    }
    let mut seen = BTreeSet::new();
    for m in models {
        if !seen.insert(sanitize(m.id())) {
            return Err(EvalError::Input(format!("duplicate model id `{}`", m.id())));
        }
    }

    let run_dir = settings.run_dir();
    fs::create_dir_all(&run_dir).map_err(io_err(&run_dir))?;
    let started_at = now();
    let config = RunSnapshot {
        task: evaluator.task(),
        cases: cases.iter().map(|c| c.name.clone()).collect(),
        models: models.iter().map(|m| m.config.clone()).collect(),
        pools: engine.config(),
        csim_backend: settings.csim.kind(),
        synth_backend: settings.synth.as_ref().map(|b| b.kind()),
        template_digests: template_digests(),
    };
    let snapshot = serde_json::json!({ "run_id": settings.run_id, "started_at": started_at, "config": config });
    write_atomic(&run_dir.join(RUN_FILE), serde_json::to_string_pretty(&snapshot).expect("snapshot").as_bytes())?;

    let drivers: Vec<_> = cases
        .iter()
        .flat_map(|c| models.iter().map(move |m| (c, m)))
        .map(|(c, m)| move |eng: &Engine| evaluate_design(eng, evaluator, c, m, settings))
        .collect();
    let results = engine.run_matrix(drivers);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(Ok(mut recs)) => records.append(&mut recs),
            Ok(Err(e)) => failures.push(e.to_string()),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if let Some(first) = failures.first() {
        return Err(EvalError::Drivers {
            count: failures.len(),
            first: first.clone(),
        });
    }
    records.sort_by_key(SampleRecord::sort_key);
    Ok(EvalRun {
        run_id: settings.run_id.clone(),
        started_at,
        config,
        records,
    })
}

/// Every `record.json` under `run_dir`, sorted by (case, model, task, sample).
pub fn load_records(run_dir: &Path) -> Result<Vec<SampleRecord>, EvalError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), EvalError> {
        for entry in fs::read_dir(dir).map_err(io_err(dir))? {
            let path = entry.map_err(io_err(dir))?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.file_name().is_some_and(|n| n == RECORD_FILE) {
                out.push(path);
            }
        }
        Ok(())
    }
    if !run_dir.is_dir() {
        return Err(EvalError::Input(format!("{} is not a directory", run_dir.display())));
    }
    let mut paths = Vec::new();
    walk(run_dir, &mut paths)?;
    let mut records = Vec::new();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let rec: SampleRecord = serde_json::from_str(&text)
            .map_err(|e| EvalError::Input(format!("{}: {e}", path.display())))?;
        records.push(rec);
    }
    records.sort_by_key(SampleRecord::sort_key);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::load_case;
    use crate::llm::{MockModel, MockScript};
    use crate::toolchain::MockToolchain;

    fn write_case(root: &Path) -> BenchmarkCase {
        let dir = root.join("inc");
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("inc.h"), "int inc(int a);\n").unwrap();
        fs::write(dir.join("inc.cpp"), "#include \"inc.h\"\nint inc(int a) { return a + 1; }\n").unwrap();
        fs::write(dir.join("inc_tb.cpp"), "#include \"inc.h\"\nint main() { return inc(1) == 2 ? 0 : 1; }\n").unwrap();
        fs::write(dir.join("kernel_description.md"), "Kernel Description:\nadds one\n\nTop-Level Function: `inc`\n").unwrap();
        load_case(&dir).unwrap()
    }

    fn settings(out: &Path) -> EvalSettings {
        EvalSettings {
            output_root: out.to_path_buf(),
            run_id: "r".into(),
            resume: false,
            csim: Arc::new(ToolchainBackend::Mock(MockToolchain)),
            synth: Some(Arc::new(ToolchainBackend::Mock(MockToolchain))),
        }
    }

    fn model(replies: &[&str]) -> Model {
        let cfg = ModelConfig {
            n_samples: replies.len(),
            ..Default::default()
        };
        Model::new(cfg, Arc::new(MockModel::new(MockScript::per_sample(replies.iter().copied()))))
    }

    fn kernel(body: &str) -> String {
        format!("<OUTPUT_CODE name=\"inc.cpp\">\n#include \"inc.h\"\n{body}\nint inc(int a) {{ return a + 1; }}\n</OUTPUT_CODE>")
    }

    #[test]
    fn gating_per_sample() {
        let tmp = tempfile::tempdir().unwrap();
        let case = write_case(tmp.path());
        let engine = Engine::new(PoolConfig::uniform(2)).unwrap();
        let replies = [
            kernel(""),
            "I cannot help with that.".to_string(),
            kernel("// MOCK:compile=fail"),
            kernel("// MOCK:run=1"),
        ];
        let m = model(&replies.iter().map(String::as_str).collect::<Vec<_>>());
        let s = settings(&tmp.path().join("out"));
        let recs = evaluate_design(&engine, &GenerationEvaluator::default(), &case, &m, &s).unwrap();
        let flags: Vec<_> = recs.iter().map(|r| r.flags().as_tuple()).collect();
        assert_eq!(
            flags,
            vec![
                (true, true, true, true),
                (false, false, false, false),
                (true, false, false, false),
                (true, true, false, true)
            ]
        );
        assert!(recs[1].executions.is_empty());
        assert!(recs[1].extracted_files.is_empty());
        assert_eq!(recs[2].executions.len(), 1);
        assert_eq!(recs[3].executions.len(), 3);

        let d = s.sample_dir("inc", "mock", TaskId::Generation, 0);
        assert_eq!(fs::read_to_string(d.join("response.txt")).unwrap(), replies[0]);
        assert_eq!(fs::read_to_string(d.join("files/inc.cpp")).unwrap(), recs[0].extracted_files["inc.cpp"]);
        for log in ["compile.log", "run.log", "synth.log", RECORD_FILE] {
            assert!(d.join(log).is_file(), "{log}");
        }
        assert_eq!(recs[0].executions[0].workdir, PathBuf::from("inc/mock/gen/0/work/compile"));
    }

    #[test]
    fn transport_failure_is_a_failed_sample() {
        let tmp = tempfile::tempdir().unwrap();
        let case = write_case(tmp.path());
        let engine = Engine::new(PoolConfig::uniform(1)).unwrap();
        let script: MockScript = serde_json::from_str(r#"{"per_sample": [{"error": "connection reset"}]}"#).unwrap();
        let m = Model::new(
            ModelConfig {
                n_samples: 1,
                ..Default::default()
            },
            Arc::new(MockModel::new(script)),
        );
        let recs = evaluate_design(&engine, &GenerationEvaluator::default(), &case, &m, &settings(tmp.path())).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(!recs[0].parseable);
        assert!(recs[0].error_note.as_deref().unwrap().contains("connection reset"));
    }

    #[test]
    fn generation_kernel_mapping() {
        let tmp = tempfile::tempdir().unwrap();
        let case = write_case(tmp.path());
        let g = GenerationEvaluator::default();
        let mut files = FileMap::new();
        files.insert("other_name.cpp".into(), "x".into());
        files.insert("inc.h".into(), "ignored".into());
        let repl = g.replacements(&case, &files).unwrap();
        assert_eq!(repl.len(), 1);
        assert_eq!(repl["inc.cpp"], "x");
    }

    #[test]
    fn edit_file_set_must_match() {
        let tmp = tempfile::tempdir().unwrap();
        let case = write_case(tmp.path());
        let mut files: FileMap = ["inc.h", "inc.cpp", "inc_tb.cpp"].iter().map(|n| (n.to_string(), "c".to_string())).collect();
        assert_eq!(apply_edit_task(&case, &files).unwrap().len(), 3);
        let body = files.remove("inc.cpp").unwrap();
        files.insert("inc_opt.cpp".into(), body);
        assert!(matches!(apply_edit_task(&case, &files), Err(MaterializeError::FileSetMismatch { .. })));
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let case = write_case(tmp.path());
        let engine = Engine::new(PoolConfig::uniform(1)).unwrap();
        let g = GenerationEvaluator::default();
        assert!(matches!(evaluate_designs(&engine, &g, &[case], &[], &settings(tmp.path())), Err(EvalError::Input(_))));
        assert!(matches!(
            evaluate_designs(&engine, &g, &[], &[model(&["x"])], &settings(tmp.path())),
            Err(EvalError::Input(_))
        ));
    }

    #[test]
    fn resume_reruns_only_missing_samples() {
        let tmp = tempfile::tempdir().unwrap();
        let case = write_case(tmp.path());
        let engine = Engine::new(PoolConfig::uniform(2)).unwrap();
        let k = kernel("");
        let m = model(&[&k, &k, &k]);
        let mut s = settings(&tmp.path().join("out"));
        let g = GenerationEvaluator::default();
        let first = evaluate_designs(&engine, &g, std::slice::from_ref(&case), std::slice::from_ref(&m), &s).unwrap();
        assert_eq!(first.records.len(), 3);

        fs::remove_dir_all(s.sample_dir("inc", "mock", TaskId::Generation, 1)).unwrap();
        s.resume = true;
        let before = engine.trace().count(PoolKind::Csim, crate::engine::EventKind::Enqueued);
        let second = evaluate_designs(&engine, &g, &[case], &[m], &s).unwrap();
        let after = engine.trace().count(PoolKind::Csim, crate::engine::EventKind::Enqueued);
        assert_eq!(after - before, 1);
        let h = |r: &EvalRun| r.records.iter().map(SampleRecord::content_hash).collect::<Vec<_>>();
        assert_eq!(h(&first), h(&second));
        assert_eq!(load_records(&s.run_dir()).unwrap().len(), 3);
        assert!(s.run_dir().join(RUN_FILE).is_file());
    }

    #[test]
    fn sanitizing_names() {
        assert_eq!(sanitize("gpt-4o/mini:latest"), "gpt-4o_mini_latest");
        assert_eq!(sanitize(".."), "_");
    }
}
