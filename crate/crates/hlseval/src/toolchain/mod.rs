// SPDX-License-Identifier: Apache-2.0

//! The two HLS tool interfaces: two-step C-simulation (compile, then run the
//! testbench binary) and synthesis.
//!
//! Three backends implement them:
//!
//! - [`LocalCompiler`]: the system C++ compiler. C-simulation only.
//! - [`VendorHls`]: the vendor HLS tool driven by generated Tcl scripts.
//! - [`MockToolchain`]: scripted by `// MOCK:` marker comments in the sources.
//!
//! Each call works inside `work_root/<stage>/`, recreated on every call.
//! Callers give concurrent calls distinct work roots.

mod local;
mod mock;
pub mod process;
mod vendor;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

pub use hlseval_core::synth_report::SynthReport;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use local::LocalCompiler;
pub use mock::MockToolchain;
pub use process::TIMEOUT_RETURN_CODE;
pub use vendor::{auto_find_vitis_hls, VendorHls};

use crate::case::{CaseError, Design};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Compile,
    Run,
    Synth,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Compile => "compile",
            Stage::Run => "run",
            Stage::Synth => "synth",
        }
    }
}

/// Captured result of one tool stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolExecution {
    pub stage: Stage,
    pub return_code: i32,
    pub stdout: String,
    pub stderr: String,
    /// Wall time in seconds.
    pub duration: f64,
    pub workdir: PathBuf,
}

impl ToolExecution {
    pub fn succeeded(&self) -> bool {
        self.return_code == 0
    }

    pub fn timed_out(&self) -> bool {
        self.return_code == TIMEOUT_RETURN_CODE
    }

    /// Human-readable log: return code, then both streams.
    pub fn to_log(&self) -> String {
        format!(
            "stage: {}\nreturn_code: {}\nduration_s: {:.3}\nworkdir: {}\n--- stdout ---\n{}\n--- stderr ---\n{}\n",
            self.stage.as_str(),
            self.return_code,
            self.duration,
            self.workdir.display(),
            self.stdout,
            self.stderr
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsimOutcome {
    pub compile: ToolExecution,
    /// Present iff the compile stage returned 0.
    pub run: Option<ToolExecution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutcome {
    pub exec: ToolExecution,
    /// Present only when synthesis succeeded.
    pub report: Option<SynthReport>,
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("toolchain configuration: {0}")]
    Config(String),
    #[error("{backend} backend does not support {operation}")]
    Unsupported {
        backend: &'static str,
        operation: &'static str,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Design(#[from] CaseError),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ToolError + '_ {
    move |source| ToolError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeouts {
    #[serde(with = "secs")]
    pub compile: Duration,
    #[serde(with = "secs")]
    pub run: Duration,
    #[serde(with = "secs")]
    pub synth: Duration,
}

impl Default for Timeouts {
    fn default() -> Self {
        Timeouts {
            compile: Duration::from_secs(120),
            run: Duration::from_secs(60),
            synth: Duration::from_secs(1800),
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    LocalCompiler,
    VendorHls,
    Mock,
}

#[derive(Debug, Clone)]
pub enum ToolchainBackend {
    LocalCompiler(LocalCompiler),
    VendorHls(VendorHls),
    Mock(MockToolchain),
}

impl ToolchainBackend {
    pub fn kind(&self) -> BackendKind {
        match self {
            ToolchainBackend::LocalCompiler(_) => BackendKind::LocalCompiler,
            ToolchainBackend::VendorHls(_) => BackendKind::VendorHls,
            ToolchainBackend::Mock(_) => BackendKind::Mock,
        }
    }

    /// Compiles the design with its testbench, then runs the binary if the
    /// compile stage succeeded.
    pub fn csim(&self, design: &Design, work_root: &Path) -> Result<CsimOutcome, ToolError> {
        let outcome = match self {
            ToolchainBackend::LocalCompiler(b) => b.csim(design, work_root),
            ToolchainBackend::VendorHls(b) => b.csim(design, work_root),
            ToolchainBackend::Mock(b) => b.csim(design, work_root),
        }?;
        debug_assert_eq!(outcome.run.is_some(), outcome.compile.succeeded());
        Ok(outcome)
    }

    pub fn synth(&self, design: &Design, work_root: &Path) -> Result<SynthOutcome, ToolError> {
        match self {
            ToolchainBackend::LocalCompiler(_) => Err(ToolError::Unsupported {
                backend: "local_compiler",
                operation: "synthesis",
            }),
            ToolchainBackend::VendorHls(b) => b.synth(design, work_root),
            ToolchainBackend::Mock(b) => b.synth(design, work_root),
        }
    }
}

/// Recreates `work_root/<stage>` and returns it.
pub(crate) fn fresh_stage_dir(work_root: &Path, stage: Stage) -> Result<PathBuf, ToolError> {
    let dir = work_root.join(stage.as_str());
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

/// Copies design files (relative to `design_dir`) into `dest`.
pub(crate) fn copy_into<'a>(
    design_dir: &Path,
    files: impl IntoIterator<Item = &'a PathBuf>,
    dest: &Path,
) -> Result<(), ToolError> {
    for rel in files {
        let target = dest.join(rel);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let src = design_dir.join(rel);
        fs::copy(&src, &target).map_err(io_err(&src))?;
    }
    Ok(())
}

/// Runs a command and packages the result, mapping a missing binary to a
/// configuration error.
pub(crate) fn execute(
    stage: Stage,
    cmd: Command,
    workdir: &Path,
    timeout: Duration,
    program: &Path,
) -> Result<ToolExecution, ToolError> {
    let captured = process::run_captured(cmd, timeout).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ToolError::Config(format!("`{}` not found", program.display()))
        } else {
            ToolError::Io {
                path: program.to_path_buf(),
                source: e,
            }
        }
    })?;
    let mut stderr = String::from_utf8_lossy(&captured.stderr).into_owned();
    if captured.timed_out {
        stderr.push_str(&format!(
            "\n[hlseval] killed after exceeding the {:.1}s time limit\n",
            timeout.as_secs_f64()
        ));
    }
    Ok(ToolExecution {
        stage,
        return_code: captured.code,
        stdout: String::from_utf8_lossy(&captured.stdout).into_owned(),
        stderr,
        duration: captured.duration.as_secs_f64(),
        workdir: workdir.to_path_buf(),
    })
}
