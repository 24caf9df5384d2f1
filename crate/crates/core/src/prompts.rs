// SPDX-License-Identifier: Apache-2.0

//! Prompt templates and prompt assembly.
//!
//! Template bodies are stored verbatim as text assets under `templates/` and
//! compiled in. Slots use the `{identifier}` grammar; substitution is a single
//! left-to-right pass, so text inserted into a slot is never re-scanned.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slot names a template may use.
pub const SLOTS: [&str; 4] = ["top_name", "existing_description", "kernel_code", "file_list"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateId {
    Preamble,
    GenKernel,
    EditLoopLabels,
    EditFixedPoint,
    EditDataflow,
    EditTiling,
    OutputFormat,
    MetaHierarchy,
    MetaDescription,
    MetaTestbench,
}

impl TemplateId {
    pub const ALL: [TemplateId; 10] = [
        TemplateId::Preamble,
        TemplateId::GenKernel,
        TemplateId::EditLoopLabels,
        TemplateId::EditFixedPoint,
        TemplateId::EditDataflow,
        TemplateId::EditTiling,
        TemplateId::OutputFormat,
        TemplateId::MetaHierarchy,
        TemplateId::MetaDescription,
        TemplateId::MetaTestbench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateId::Preamble => "preamble",
            TemplateId::GenKernel => "gen_kernel",
            TemplateId::EditLoopLabels => "edit_loop_labels",
            TemplateId::EditFixedPoint => "edit_fixed_point",
            TemplateId::EditDataflow => "edit_dataflow",
            TemplateId::EditTiling => "edit_tiling",
            TemplateId::OutputFormat => "output_format",
            TemplateId::MetaHierarchy => "meta_hierarchy",
            TemplateId::MetaDescription => "meta_description",
            TemplateId::MetaTestbench => "meta_testbench",
        }
    }

    pub fn body(self) -> &'static str {
        match self {
            TemplateId::Preamble => include_str!("../templates/preamble.txt"),
            TemplateId::GenKernel => include_str!("../templates/gen_kernel.txt"),
            TemplateId::EditLoopLabels => include_str!("../templates/edit_loop_labels.txt"),
            TemplateId::EditFixedPoint => include_str!("../templates/edit_fixed_point.txt"),
            TemplateId::EditDataflow => include_str!("../templates/edit_dataflow.txt"),
            TemplateId::EditTiling => include_str!("../templates/edit_tiling.txt"),
            TemplateId::OutputFormat => include_str!("../templates/output_format.txt"),
            TemplateId::MetaHierarchy => include_str!("../templates/meta_hierarchy.txt"),
            TemplateId::MetaDescription => include_str!("../templates/meta_description.txt"),
            TemplateId::MetaTestbench => include_str!("../templates/meta_testbench.txt"),
        }
    }

    /// Slots referenced by the body, in order of first appearance.
    pub fn slots(self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for (_, name) in find_slots(self.body()) {
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("missing value for slot `{0}`")]
    MissingSlot(String),
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Byte offsets and names of `{identifier}` markers in `body`.
fn find_slots(body: &str) -> impl Iterator<Item = (usize, &str)> + '_ {
    body.match_indices('{').filter_map(move |(start, _)| {
        let rest = &body[start + 1..];
        let end = rest.find(['}', '{', '\n'])?;
        let name = &rest[..end];
        (rest.as_bytes()[end] == b'}' && is_ident(name)).then_some((start, name))
    })
}

/// Substitutes every `{identifier}` marker in `body`.
///
/// Values for names the body does not use are ignored. A marker without a
/// value is an error.
pub fn render_text(body: &str, slots: &[(&str, &str)]) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(body.len());
    let mut last = 0;
    for (start, name) in find_slots(body) {
        let value = slots
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| TemplateError::MissingSlot(name.into()))?;
        out.push_str(&body[last..start]);
        out.push_str(value);
        last = start + name.len() + 2;
    }
    out.push_str(&body[last..]);
    Ok(out)
}

pub fn render(id: TemplateId, slots: &[(&str, &str)]) -> Result<String, TemplateError> {
    render_text(id.body(), slots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditTask {
    LoopLabels,
    FixedPoint,
    Dataflow,
    Tiling,
}

impl EditTask {
    pub const ALL: [EditTask; 4] = [
        EditTask::LoopLabels,
        EditTask::FixedPoint,
        EditTask::Dataflow,
        EditTask::Tiling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EditTask::LoopLabels => "loop_labels",
            EditTask::FixedPoint => "fixed_point",
            EditTask::Dataflow => "dataflow",
            EditTask::Tiling => "tiling",
        }
    }

    pub fn template(self) -> TemplateId {
        match self {
            EditTask::LoopLabels => TemplateId::EditLoopLabels,
            EditTask::FixedPoint => TemplateId::EditFixedPoint,
            EditTask::Dataflow => TemplateId::EditDataflow,
            EditTask::Tiling => TemplateId::EditTiling,
        }
    }

    /// Manifest tag marking a case as suitable for this task.
    pub fn applicability_tag(self) -> String {
        format!("edit:{}", self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown editing task `{0}` (expected one of: loop-labels, fixed-point, dataflow, tiling)")]
pub struct UnknownTask(pub String);

impl FromStr for EditTask {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        EditTask::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| UnknownTask(s.into()))
    }
}

impl fmt::Display for EditTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The task a sample was produced for: `gen` or one of the editing tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskId {
    Generation,
    Edit(EditTask),
}

impl TaskId {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::Generation => "gen",
            TaskId::Edit(t) => t.as_str(),
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "gen" {
            Ok(TaskId::Generation)
        } else {
            s.parse().map(TaskId::Edit)
        }
    }
}

impl Serialize for TaskId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TaskId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A named source file borrowed from a case.
#[derive(Debug, Clone, Copy)]
pub struct SourceFile<'a> {
    pub name: &'a str,
    pub content: &'a str,
}

/// The text of a case, as needed to build task prompts.
#[derive(Debug, Clone)]
pub struct CaseSources<'a> {
    pub description: &'a str,
    pub header: SourceFile<'a>,
    pub kernels: Vec<SourceFile<'a>>,
    pub testbench: SourceFile<'a>,
}

/// Ordered prompt segments; the full prompt joins them with one blank line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PromptBundle {
    pub segments: Vec<String>,
}

impl PromptBundle {
    pub fn push(&mut self, segment: impl Into<String>) {
        self.segments.push(segment.into());
    }

    pub fn rendered(&self) -> String {
        self.segments.join("\n\n")
    }
}

fn file_section(title: &str, file: SourceFile<'_>) -> String {
    let content = file.content.strip_suffix('\n').unwrap_or(file.content);
    format!("## {title}: `{}`\n```cpp\n{content}\n```", file.name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationOptions {
    /// Show the testbench to the model (on by default).
    pub include_testbench: bool,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        GenerationOptions {
            include_testbench: true,
        }
    }
}

/// Preamble, generation task, description, header, testbench, output format.
pub fn generation_prompt(case: &CaseSources<'_>, opts: GenerationOptions) -> PromptBundle {
    let mut bundle = PromptBundle::default();
    bundle.push(TemplateId::Preamble.body());
    bundle.push(TemplateId::GenKernel.body());
    let description = case.description.trim_end();
    bundle.push(format!("## Design Description\n{description}"));
    bundle.push(file_section("Header File", case.header));
    if opts.include_testbench {
        bundle.push(file_section("Testbench File", case.testbench));
    }
    bundle.push(TemplateId::OutputFormat.body());
    bundle
}

/// Preamble, editing task, header, kernel sources, testbench, output format.
pub fn edit_prompt(case: &CaseSources<'_>, task: EditTask) -> PromptBundle {
    let mut bundle = PromptBundle::default();
    bundle.push(TemplateId::Preamble.body());
    bundle.push(task.template().body());
    bundle.push(file_section("Header File", case.header));
    for kernel in &case.kernels {
        bundle.push(file_section("Kernel File", *kernel));
    }
    bundle.push(file_section("Testbench File", case.testbench));
    bundle.push(TemplateId::OutputFormat.body());
    bundle
}
