// SPDX-License-Identifier: Apache-2.0

//! LLM-ready benchmark cases and the designs materialized from them.
//!
//! A case directory holds exactly one header (`*.h`), one or more kernel
//! sources (`*.cpp`), exactly one testbench (`*_tb.cpp`), a
//! `kernel_description.md`, an optional `case.toml` manifest (`name`,
//! `top_name`, `tags`), and any data files the testbench reads. Data files
//! are resolved relative to the directory the testbench runs in, so they are
//! carried along verbatim.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Component, Path, PathBuf};

use hlseval_core::files::{
    classify, contains_token, infer_top_name, is_bare_filename, FileRole, DESCRIPTION_FILE,
    MANIFEST_FILE, TESTBENCH_SUFFIX,
};
use hlseval_core::prompts::{CaseSources, SourceFile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TOP_MARKER: &str = "Top-Level Function:";

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("designs root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),
    #[error("invalid case {dir}: {violation}")]
    Validation { dir: PathBuf, violation: Violation },
    #[error("replacement `{0}` does not name a file of the case")]
    UnknownReplacement(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("no `*_tb.cpp` testbench")]
    MissingTestbench,
    #[error("more than one testbench: {0:?}")]
    MultipleTestbenches(Vec<String>),
    #[error("no `*.h` header")]
    MissingHeader,
    #[error("more than one header: {0:?}")]
    MultipleHeaders(Vec<String>),
    #[error("no kernel source")]
    MissingKernel,
    #[error("no {DESCRIPTION_FILE}")]
    MissingDescription,
    #[error("{DESCRIPTION_FILE} is empty")]
    EmptyDescription,
    #[error("description lacks the `{TOP_MARKER}` section")]
    DescriptionWithoutTop,
    #[error("top function is not set in {MANIFEST_FILE} and the header does not declare exactly one function")]
    TopNameUndiscoverable,
    #[error("top function `{0}` does not appear in the header")]
    TopNameNotInHeader(String),
    #[error("bad {MANIFEST_FILE}: {0}")]
    BadManifest(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CaseError + '_ {
    move |source| CaseError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Optional per-case manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_name: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub name: String,
    pub case_dir: PathBuf,
    /// Paths below are relative to `case_dir`.
    pub header_file: PathBuf,
    pub kernel_files: Vec<PathBuf>,
    pub testbench_file: PathBuf,
    pub description: String,
    pub top_name: String,
    pub tags: Vec<String>,
    pub aux_files: Vec<PathBuf>,
}

/// File contents of a case, read on demand.
#[derive(Debug, Clone)]
pub struct CaseTexts {
    pub header: (String, String),
    pub kernels: Vec<(String, String)>,
    pub testbench: (String, String),
}

impl CaseTexts {
    pub fn sources<'a>(&'a self, description: &'a str) -> CaseSources<'a> {
        let file = |(name, content): &'a (String, String)| SourceFile { name, content };
        CaseSources {
            description,
            header: file(&self.header),
            kernels: self.kernels.iter().map(file).collect(),
            testbench: file(&self.testbench),
        }
    }
}

fn file_name_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

impl BenchmarkCase {
    pub fn manifest(&self) -> CaseManifest {
        CaseManifest {
            name: Some(self.name.clone()),
            top_name: Some(self.top_name.clone()),
            tags: self.tags.clone(),
        }
    }

    pub fn write_manifest(&self) -> Result<(), CaseError> {
        let path = self.case_dir.join(MANIFEST_FILE);
        let text = toml::to_string(&self.manifest()).expect("manifest serializes");
        fs::write(&path, text).map_err(io_err(&path))
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// Every file of the case, relative to `case_dir`.
    pub fn all_files(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.header_file)
            .chain(&self.kernel_files)
            .chain(std::iter::once(&self.testbench_file))
            .chain(&self.aux_files)
    }

    pub fn header_name(&self) -> String {
        file_name_string(&self.header_file)
    }

    pub fn testbench_name(&self) -> String {
        file_name_string(&self.testbench_file)
    }

    pub fn kernel_names(&self) -> Vec<String> {
        self.kernel_files.iter().map(|p| file_name_string(p)).collect()
    }

    pub fn read_texts(&self) -> Result<CaseTexts, CaseError> {
        let read = |rel: &PathBuf| -> Result<(String, String), CaseError> {
            let path = self.case_dir.join(rel);
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            Ok((file_name_string(rel), text))
        };
        Ok(CaseTexts {
            header: read(&self.header_file)?,
            kernels: self.kernel_files.iter().map(read).collect::<Result<_, _>>()?,
            testbench: read(&self.testbench_file)?,
        })
    }
}

fn is_hidden(name: &str) -> bool {
    name.starts_with('.')
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>, CaseError> {
    let mut entries = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err(dir))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn is_case_dir(dir: &Path) -> Result<bool, CaseError> {
    if !dir.join(DESCRIPTION_FILE).is_file() {
        return Ok(false);
    }
    for entry in sorted_entries(dir)? {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(TESTBENCH_SUFFIX) && entry.path().is_file() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All case directories under `root`, recursively, in lexicographic order.
///
/// A case directory holds a description file and at least one testbench.
/// Hidden directories (such as `.staging`) are not searched.
pub fn discover_cases(root: &Path) -> Result<Vec<PathBuf>, CaseError> {
    if !root.is_dir() {
        return Err(CaseError::MissingRoot(root.to_path_buf()));
    }
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if is_case_dir(&dir)? {
            found.push(dir.clone());
        }
        for entry in sorted_entries(&dir)? {
            let name = entry.file_name().to_string_lossy().into_owned();
            if entry.path().is_dir() && !is_hidden(&name) {
                stack.push(entry.path());
            }
        }
    }
    found.sort();
    Ok(found)
}

fn collect_aux(dir: &Path, rel: &Path, out: &mut Vec<PathBuf>) -> Result<(), CaseError> {
    for entry in sorted_entries(dir)? {
        let name = entry.file_name().to_string_lossy().into_owned();
        if is_hidden(&name) {
            continue;
        }
        let path = entry.path();
        if path.is_dir() {
            collect_aux(&path, &rel.join(&name), out)?;
        } else {
            out.push(rel.join(&name));
        }
    }
    Ok(())
}

/// Loads and validates the case stored in `dir`.
pub fn load_case(dir: &Path) -> Result<BenchmarkCase, CaseError> {
    let invalid = |violation| CaseError::Validation {
        dir: dir.to_path_buf(),
        violation,
    };

    let mut headers = Vec::new();
    let mut kernels = Vec::new();
    let mut testbenches = Vec::new();
    let mut aux = Vec::new();
    for entry in sorted_entries(dir)? {
        let name = entry.file_name().to_string_lossy().into_owned();
        if is_hidden(&name) {
            continue;
        }
        let path = entry.path();
        if path.is_dir() {
            collect_aux(&path, Path::new(&name), &mut aux)?;
            continue;
        }
        match classify(&name) {
            FileRole::Header => headers.push(name),
            FileRole::Kernel => kernels.push(name),
            FileRole::Testbench => testbenches.push(name),
            FileRole::Aux => aux.push(PathBuf::from(name)),
            FileRole::Description | FileRole::Manifest => {}
        }
    }

    let testbench = match testbenches.len() {
        0 => return Err(invalid(Violation::MissingTestbench)),
        1 => testbenches.remove(0),
        _ => return Err(invalid(Violation::MultipleTestbenches(testbenches))),
    };
    let header = match headers.len() {
        0 => return Err(invalid(Violation::MissingHeader)),
        1 => headers.remove(0),
        _ => return Err(invalid(Violation::MultipleHeaders(headers))),
    };
    if kernels.is_empty() {
        return Err(invalid(Violation::MissingKernel));
    }

    let desc_path = dir.join(DESCRIPTION_FILE);
    if !desc_path.is_file() {
        return Err(invalid(Violation::MissingDescription));
    }
    let description = fs::read_to_string(&desc_path).map_err(io_err(&desc_path))?;
    if description.trim().is_empty() {
        return Err(invalid(Violation::EmptyDescription));
    }
    if !description.contains(TOP_MARKER) {
        return Err(invalid(Violation::DescriptionWithoutTop));
    }

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = if manifest_path.is_file() {
        let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
        toml::from_str::<CaseManifest>(&text)
            .map_err(|e| invalid(Violation::BadManifest(e.message().to_string())))?
    } else {
        CaseManifest::default()
    };

    let header_path = dir.join(&header);
    let header_text = fs::read_to_string(&header_path).map_err(io_err(&header_path))?;
    let top_name = match manifest.top_name {
        Some(t) => t,
        None => infer_top_name(&header_text).ok_or_else(|| invalid(Violation::TopNameUndiscoverable))?,
    };
    if !contains_token(&header_text, &top_name) {
        return Err(invalid(Violation::TopNameNotInHeader(top_name)));
    }

    let name = match manifest.name {
        Some(n) => n,
        None => dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };

    Ok(BenchmarkCase {
        name,
        case_dir: dir.to_path_buf(),
        header_file: PathBuf::from(header),
        kernel_files: kernels.into_iter().map(PathBuf::from).collect(),
        testbench_file: PathBuf::from(testbench),
        description,
        top_name,
        tags: manifest.tags,
        aux_files: aux,
    })
}

/// Discovers and loads every case under `root`.
pub fn load_all(root: &Path) -> Result<Vec<BenchmarkCase>, CaseError> {
    discover_cases(root)?.iter().map(|d| load_case(d)).collect()
}

/// A design on disk, ready for the tools.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub design_dir: PathBuf,
    /// Header and kernel sources, relative to `design_dir`; compiled and synthesized.
    pub source_files: Vec<PathBuf>,
    /// Testbench and data files, relative to `design_dir`; used by C-simulation only.
    pub not_source_files: Vec<PathBuf>,
    pub top_name: String,
}

impl Design {
    /// The case's own directory used in place, without copying.
    pub fn from_case(case: &BenchmarkCase) -> Design {
        Design {
            design_dir: case.case_dir.clone(),
            source_files: std::iter::once(case.header_file.clone())
                .chain(case.kernel_files.iter().cloned())
                .collect(),
            not_source_files: std::iter::once(case.testbench_file.clone())
                .chain(case.aux_files.iter().cloned())
                .collect(),
            top_name: case.top_name.clone(),
        }
    }

    pub fn from_path(dir: &Path) -> Result<Design, CaseError> {
        load_case(dir).map(|c| Design::from_case(&c))
    }

    pub fn testbench(&self) -> Option<&PathBuf> {
        self.not_source_files
            .iter()
            .find(|p| p.to_string_lossy().ends_with(TESTBENCH_SUFFIX))
    }

    /// Non-testbench entries of `not_source_files`.
    pub fn data_files(&self) -> impl Iterator<Item = &PathBuf> {
        self.not_source_files
            .iter()
            .filter(|p| !p.to_string_lossy().ends_with(TESTBENCH_SUFFIX))
    }

    /// Contents of every source and testbench file, in order.
    pub fn read_code(&self) -> Result<Vec<String>, CaseError> {
        self.source_files
            .iter()
            .chain(self.testbench())
            .map(|rel| {
                let path = self.design_dir.join(rel);
                fs::read_to_string(&path).map_err(io_err(&path))
            })
            .collect()
    }
}

fn is_plain_relative(p: &Path) -> bool {
    p.components().all(|c| matches!(c, Component::Normal(_)))
}

/// Writes the case's files into `dest`, substituting `replacements`, and
/// returns the resulting design.
///
/// Replacement keys must be names of files the case already has, so nothing
/// is ever written outside `dest`.
pub fn case_to_design(
    case: &BenchmarkCase,
    replacements: &BTreeMap<String, String>,
    dest: &Path,
) -> Result<Design, CaseError> {
    let known: Vec<String> = case.all_files().map(|p| file_name_string(p)).collect();
    for name in replacements.keys() {
        if !is_bare_filename(name) && !is_plain_relative(Path::new(name)) {
            return Err(CaseError::UnknownReplacement(name.clone()));
        }
        if !known.contains(name) {
            return Err(CaseError::UnknownReplacement(name.clone()));
        }
    }

    fs::create_dir_all(dest).map_err(io_err(dest))?;
    for rel in case.all_files() {
        if !is_plain_relative(rel) {
            continue;
        }
        let target = dest.join(rel);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        match replacements.get(&file_name_string(rel)) {
            Some(content) => fs::write(&target, content).map_err(io_err(&target))?,
            None => {
                let src = case.case_dir.join(rel);
                fs::copy(&src, &target).map_err(io_err(&src))?;
            }
        }
    }

    let mut design = Design::from_case(case);
    design.design_dir = dest.to_path_buf();
    Ok(design)
}
