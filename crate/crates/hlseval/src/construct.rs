// SPDX-License-Identifier: Apache-2.0

//! LLM-aided benchmark construction: hierarchy extraction, description
//! generation, and testbench generation with toolchain validation.
//!
//! Each command renders its meta-prompt, asks the model once, and parses the
//! reply. Outputs go to a staging directory for human review; nothing is
//! written into a case unless explicitly promoted.

use std::fs;
use std::path::{Path, PathBuf};

use hlseval_core::construct::{
    parse_description_response, parse_hierarchy_response, parse_testbench_response, ConstructParseError,
    Subcomponents,
};
use hlseval_core::files::TESTBENCH_SUFFIX;
use hlseval_core::prompts::{render, TemplateError, TemplateId};
use thiserror::Error;

use crate::case::Design;
use crate::llm::{LlmError, Model};
use crate::toolchain::{CsimOutcome, ToolError, ToolchainBackend};

pub const STAGING_DIR: &str = ".staging";
pub const HIERARCHY_FILE: &str = "hierarchy.md";

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] LlmError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("could not parse the model response: {error}")]
    Parse {
        error: ConstructParseError,
        /// The full reply, kept for the human reviewer.
        raw: String,
    },
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} already exists; pass --force to overwrite")]
    WouldOverwrite(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ConstructError + '_ {
    move |source| ConstructError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Source code to build a case from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionInput {
    pub source_files: Vec<PathBuf>,
    pub top_name: String,
    pub existing_description: Option<String>,
    /// Files the testbench may read at run time.
    pub data_files: Vec<PathBuf>,
}

struct LoadedSource {
    name: String,
    content: String,
}

impl ConstructionInput {
    pub fn validate(&self) -> Result<(), ConstructError> {
        if self.source_files.is_empty() {
            return Err(ConstructError::Input("no source files given".into()));
        }
        if self.top_name.trim().is_empty() {
            return Err(ConstructError::Input("empty top function name".into()));
        }
        Ok(())
    }

    fn load(&self) -> Result<Vec<LoadedSource>, ConstructError> {
        self.validate()?;
        self.source_files
            .iter()
            .map(|p| {
                let content = fs::read_to_string(p).map_err(io_err(p))?;
                Ok(LoadedSource {
                    name: file_name(p)?,
                    content,
                })
            })
            .collect()
    }

    fn slots<'a>(&'a self, kernel_code: &'a str, file_list: &'a str) -> [(&'static str, &'a str); 4] {
        [
            ("top_name", self.top_name.as_str()),
            ("existing_description", self.existing_description.as_deref().unwrap_or("")),
            ("kernel_code", kernel_code),
            ("file_list", file_list),
        ]
    }
}

fn file_name(p: &Path) -> Result<String, ConstructError> {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| ConstructError::Input(format!("{} is not a file path", p.display())))
}

/// Every source file as a titled, fenced block.
fn kernel_code(sources: &[LoadedSource]) -> String {
    sources
        .iter()
        .map(|s| {
            let body = s.content.strip_suffix('\n').unwrap_or(&s.content);
            format!("File: `{}`\n```cpp\n{body}\n```", s.name)
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn joined_source(sources: &[LoadedSource]) -> String {
    sources.iter().map(|s| s.content.as_str()).collect::<Vec<_>>().join("\n")
}

fn ask(model: &Model, prompt: &str) -> Result<String, ConstructError> {
    Ok(model.complete(prompt, 0)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyOutcome {
    pub subcomponents: Subcomponents,
    pub raw: String,
}

pub fn extract_hierarchy(input: &ConstructionInput, model: &Model) -> Result<HierarchyOutcome, ConstructError> {
    let sources = input.load()?;
    let code = kernel_code(&sources);
    let prompt = render(TemplateId::MetaHierarchy, &input.slots(&code, ""))?;
    let raw = ask(model, &prompt)?;
    match parse_hierarchy_response(&raw, &joined_source(&sources), &input.top_name) {
        Ok(subcomponents) => {
            for name in &subcomponents.rejected {
                log::warn!("dropping sub-component `{name}`: it does not occur in the source");
            }
            Ok(HierarchyOutcome { subcomponents, raw })
        }
        Err(error) => Err(ConstructError::Parse { error, raw }),
    }
}

/// Markdown list of sub-component names, `- None` when empty.
pub fn hierarchy_markdown(subs: &Subcomponents) -> String {
    if subs.kept.is_empty() {
        return "- None\n".into();
    }
    subs.kept.iter().map(|n| format!("- `{n}`\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptionOutcome {
    pub description: String,
    pub raw: String,
}

pub fn generate_description(input: &ConstructionInput, model: &Model) -> Result<DescriptionOutcome, ConstructError> {
    let sources = input.load()?;
    let code = kernel_code(&sources);
    let prompt = render(TemplateId::MetaDescription, &input.slots(&code, ""))?;
    let raw = ask(model, &prompt)?;
    match parse_description_response(&raw) {
        Ok(description) => Ok(DescriptionOutcome { description, raw }),
        Err(error) => Err(ConstructError::Parse { error, raw }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestbenchOutcome {
    pub filename: String,
    pub source: String,
    pub raw: String,
    pub csim: CsimOutcome,
}

impl TestbenchOutcome {
    /// The testbench compiled against the reference kernel and exited 0.
    pub fn accepted(&self) -> bool {
        self.csim.compile.succeeded() && self.csim.run.as_ref().is_some_and(|r| r.succeeded())
    }

    pub fn run_code(&self) -> Option<i32> {
        self.csim.run.as_ref().map(|r| r.return_code)
    }
}

/// Asks for a testbench and validates it by C-simulation against the
/// reference sources. Validation artifacts go to `work_dir`.
pub fn generate_testbench(
    input: &ConstructionInput,
    model: &Model,
    backend: &ToolchainBackend,
    work_dir: &Path,
) -> Result<TestbenchOutcome, ConstructError> {
    let sources = input.load()?;
    let code = kernel_code(&sources);
    let mut list: Vec<String> = sources.iter().map(|s| format!("- {}", s.name)).collect();
    for d in &input.data_files {
        list.push(format!("- {}", file_name(d)?));
    }
    let file_list = list.join("\n");
    let prompt = render(TemplateId::MetaTestbench, &input.slots(&code, &file_list))?;
    let raw = ask(model, &prompt)?;
    let source = parse_testbench_response(&raw).map_err(|error| ConstructError::Parse { error, raw: raw.clone() })?;
    let filename = format!("{}{TESTBENCH_SUFFIX}", input.top_name);

    let design_dir = work_dir.join("design");
    if design_dir.exists() {
        fs::remove_dir_all(&design_dir).map_err(io_err(&design_dir))?;
    }
    fs::create_dir_all(&design_dir).map_err(io_err(&design_dir))?;
    let mut source_files = Vec::new();
    for s in sources.iter().filter(|s| !s.name.ends_with(TESTBENCH_SUFFIX)) {
        let p = design_dir.join(&s.name);
        fs::write(&p, &s.content).map_err(io_err(&p))?;
        source_files.push(PathBuf::from(&s.name));
    }
    let tb_path = design_dir.join(&filename);
    fs::write(&tb_path, &source).map_err(io_err(&tb_path))?;
    let mut not_source_files = vec![PathBuf::from(&filename)];
    for d in &input.data_files {
        let name = file_name(d)?;
        let dest = design_dir.join(&name);
        fs::copy(d, &dest).map_err(io_err(d))?;
        not_source_files.push(PathBuf::from(name));
    }
    let design = Design {
        design_dir,
        source_files,
        not_source_files,
        top_name: input.top_name.clone(),
    };
    let csim = backend.csim(&design, &work_dir.join("work"))?;
    Ok(TestbenchOutcome {
        filename,
        source,
        raw,
        csim,
    })
}

/// Writes `content` as `name` into `<root>/.staging/` and returns its path.
pub fn stage(root: &Path, name: &str, content: &str) -> Result<PathBuf, ConstructError> {
    let dir = root.join(STAGING_DIR);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(io_err(&path))?;
    Ok(path)
}

/// Copies `content` into `case_dir/name`. An existing file is kept unless
/// `force` is set.
pub fn promote(case_dir: &Path, name: &str, content: &str, force: bool) -> Result<PathBuf, ConstructError> {
    let path = case_dir.join(name);
    if path.exists() && !force {
        return Err(ConstructError::WouldOverwrite(path));
    }
    fs::write(&path, content).map_err(io_err(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockModel, MockScript, ModelConfig};
    use crate::toolchain::MockToolchain;
    use std::sync::Arc;

    fn model(reply: &str) -> Model {
        Model::new(ModelConfig::default(), Arc::new(MockModel::new(MockScript::queue([reply]))))
    }

    fn input(dir: &Path) -> ConstructionInput {
        let src = dir.join("k.cpp");
        fs::write(&src, "int f(int a) { return a; }\nint g(int a) { return f(a); }\nint k(int a) { return g(a); }\n").unwrap();
        let hdr = dir.join("k.h");
        fs::write(&hdr, "int k(int a);\n").unwrap();
        ConstructionInput {
            source_files: vec![hdr, src],
            top_name: "k".into(),
            existing_description: Some("PRE-EXISTING NOTES".into()),
            data_files: vec![],
        }
    }

    #[test]
    fn hierarchy_filters_names() {
        let tmp = tempfile::tempdir().unwrap();
        let out = extract_hierarchy(&input(tmp.path()), &model("```\n- `f`\n- `g`\n- `h`\n```")).unwrap();
        assert_eq!(out.subcomponents.kept, vec!["f", "g"]);
        assert_eq!(out.subcomponents.rejected, vec!["h"]);
        assert_eq!(hierarchy_markdown(&out.subcomponents), "- `f`\n- `g`\n");
        assert_eq!(hierarchy_markdown(&Subcomponents::default()), "- None\n");
    }

    #[test]
    fn description_prompt_and_validation() {
        let tmp = tempfile::tempdir().unwrap();
        let inp = input(tmp.path());
        let script = MockScript {
            fallback: Some(crate::llm::MockReply::Text(
                "```\nKernel Description:\nx\nTop-Level Function: `k`\nInputs:\n- a\n```".into(),
            )),
            ..Default::default()
        };
        let err = generate_description(&inp, &Model::new(ModelConfig::default(), Arc::new(MockModel::new(script)))).unwrap_err();
        match err {
            ConstructError::Parse {
                error: ConstructParseError::MissingSections(s),
                raw,
            } => {
                assert_eq!(s, vec!["Outputs:"]);
                assert!(raw.contains("Kernel Description:"));
            }
            other => panic!("{other:?}"),
        }

        // The pre-existing description lands in its slot.
        let prompt = render(
            TemplateId::MetaDescription,
            &inp.slots(&kernel_code(&inp.load().unwrap()), ""),
        )
        .unwrap();
        assert!(prompt.contains("PRE-EXISTING NOTES"));
        assert!(prompt.contains("File: `k.cpp`"));
    }

    #[test]
    fn testbench_validation_with_mock_tools() {
        let tmp = tempfile::tempdir().unwrap();
        let inp = input(tmp.path());
        let backend = ToolchainBackend::Mock(MockToolchain);
        let ok = generate_testbench(&inp, &model("```cpp\nint main() { return 0; }\n```"), &backend, &tmp.path().join("w1")).unwrap();
        assert!(ok.accepted());
        assert_eq!(ok.filename, "k_tb.cpp");

        let bad = generate_testbench(&inp, &model("```cpp\n// MOCK:run=1\nint main() { return 1; }\n```"), &backend, &tmp.path().join("w2")).unwrap();
        assert!(!bad.accepted());
        assert_eq!(bad.run_code(), Some(1));

        let prose = generate_testbench(&inp, &model("Sure, here is a testbench."), &backend, &tmp.path().join("w3"));
        assert!(matches!(prose, Err(ConstructError::Parse { .. })));
    }

    #[test]
    fn staging_and_promotion() {
        let tmp = tempfile::tempdir().unwrap();
        let p = stage(tmp.path(), "kernel_description.md", "text").unwrap();
        assert_eq!(p, tmp.path().join(".staging/kernel_description.md"));
        promote(tmp.path(), "kernel_description.md", "v1", false).unwrap();
        assert!(matches!(
            promote(tmp.path(), "kernel_description.md", "v2", false),
            Err(ConstructError::WouldOverwrite(_))
        ));
        assert_eq!(fs::read_to_string(tmp.path().join("kernel_description.md")).unwrap(), "v1");
        promote(tmp.path(), "kernel_description.md", "v2", true).unwrap();
        assert_eq!(fs::read_to_string(tmp.path().join("kernel_description.md")).unwrap(), "v2");
    }
}
