// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::Command;

use super::{copy_into, execute, fresh_stage_dir, CsimOutcome, Stage, Timeouts, ToolError};
use crate::case::Design;

pub const CSIM_BINARY: &str = "csim.exe";

/// C-simulation with the system C++ compiler. HLS pragmas are ignored by
/// standard compilers, so designs build unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCompiler {
    pub cxx: PathBuf,
    pub std: String,
    pub extra_flags: Vec<String>,
    pub timeouts: Timeouts,
}

impl Default for LocalCompiler {
    fn default() -> Self {
        LocalCompiler {
            cxx: std::env::var_os("CXX")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("g++")),
            std: "c++14".into(),
            extra_flags: Vec::new(),
            timeouts: Timeouts::default(),
        }
    }
}

fn is_translation_unit(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()),
        Some("cpp" | "cc" | "cxx" | "c")
    )
}

impl LocalCompiler {
    pub fn csim(&self, design: &Design, work_root: &Path) -> Result<CsimOutcome, ToolError> {
        let testbench = design
            .testbench()
            .ok_or_else(|| ToolError::Config("design has no testbench".into()))?
            .clone();

        let compile_dir = fresh_stage_dir(work_root, Stage::Compile)?;
        copy_into(
            &design.design_dir,
            design.source_files.iter().chain(std::iter::once(&testbench)),
            &compile_dir,
        )?;

        let mut cmd = Command::new(&self.cxx);
        cmd.current_dir(&compile_dir)
            .arg(format!("-std={}", self.std))
            .arg("-I.")
            .args(&self.extra_flags);
        for src in design
            .source_files
            .iter()
            .chain(std::iter::once(&testbench))
            .filter(|p| is_translation_unit(p))
        {
            cmd.arg(src);
        }
        cmd.arg("-o").arg(CSIM_BINARY);
        let compile = execute(Stage::Compile, cmd, &compile_dir, self.timeouts.compile, &self.cxx)?;
        if !compile.succeeded() {
            return Ok(CsimOutcome { compile, run: None });
        }

        let run_dir = fresh_stage_dir(work_root, Stage::Run)?;
        copy_into(&design.design_dir, design.data_files(), &run_dir)?;
        let binary = compile_dir.join(CSIM_BINARY);
        let mut cmd = Command::new(&binary);
        cmd.current_dir(&run_dir);
        let run = execute(Stage::Run, cmd, &run_dir, self.timeouts.run, &binary)?;
        Ok(CsimOutcome {
            compile,
            run: Some(run),
        })
    }
}
