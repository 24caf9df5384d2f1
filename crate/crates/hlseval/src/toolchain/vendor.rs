// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hlseval_core::hls_script::{generate_script, ScriptAction, ScriptSpec};
use hlseval_core::synth_report::parse_synth_report;

use super::{
    copy_into, execute, fresh_stage_dir, io_err, CsimOutcome, Stage, SynthOutcome, Timeouts,
    ToolError,
};
use crate::case::Design;

const PROJECT: &str = "proj";
const SOLUTION: &str = "solution1";
const SCRIPT: &str = "run_hls.tcl";

/// Locates `vitis_hls`: `$XILINX_HLS/bin` first, then `PATH`.
pub fn auto_find_vitis_hls() -> Option<PathBuf> {
    if let Some(root) = std::env::var_os("XILINX_HLS") {
        let p = Path::new(&root).join("bin").join("vitis_hls");
        if p.is_file() {
            return Some(p);
        }
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|d| d.join("vitis_hls"))
        .find(|p| p.is_file())
}

/// The vendor HLS tool in batch mode. C-simulation builds the testbench
/// binary with `csim_design -setup` and runs it directly, so compile and run
/// are observed separately.
#[derive(Debug, Clone, PartialEq)]
pub struct VendorHls {
    pub binary: PathBuf,
    /// Target part; the tool default is used when unset.
    pub part: Option<String>,
    pub clock_period_ns: Option<f64>,
    pub cflags: Option<String>,
    pub timeouts: Timeouts,
}

impl VendorHls {
    pub fn new(binary: PathBuf) -> Self {
        VendorHls {
            binary,
            part: None,
            clock_period_ns: None,
            cflags: None,
            timeouts: Timeouts::default(),
        }
    }

    fn script(&self, design: &Design, action: ScriptAction) -> String {
        let sources: Vec<String> = design
            .source_files
            .iter()
            .map(|p| p.to_string_lossy().into_owned())
            .collect();
        let tb: Vec<String> = match action {
            ScriptAction::CsimSetup => design
                .not_source_files
                .iter()
                .map(|p| p.to_string_lossy().into_owned())
                .collect(),
            ScriptAction::Synthesize => Vec::new(),
        };
        generate_script(&ScriptSpec {
            project: PROJECT,
            solution: SOLUTION,
            top: &design.top_name,
            sources: sources.iter().map(String::as_str).collect(),
            testbench_files: tb.iter().map(String::as_str).collect(),
            part: self.part.as_deref(),
            clock_period_ns: self.clock_period_ns,
            cflags: self.cflags.as_deref(),
            action,
        })
    }

    fn run_script(
        &self,
        stage: Stage,
        dir: &Path,
        script: &str,
        timeout: std::time::Duration,
    ) -> Result<super::ToolExecution, ToolError> {
        let path = dir.join(SCRIPT);
        fs::write(&path, script).map_err(io_err(&path))?;
        let mut cmd = Command::new(&self.binary);
        cmd.current_dir(dir).arg("-f").arg(SCRIPT);
        execute(stage, cmd, dir, timeout, &self.binary)
    }

    pub fn csim(&self, design: &Design, work_root: &Path) -> Result<CsimOutcome, ToolError> {
        let compile_dir = fresh_stage_dir(work_root, Stage::Compile)?;
        copy_into(
            &design.design_dir,
            design.source_files.iter().chain(&design.not_source_files),
            &compile_dir,
        )?;
        let script = self.script(design, ScriptAction::CsimSetup);
        let mut compile = self.run_script(Stage::Compile, &compile_dir, &script, self.timeouts.compile)?;
        let binary = compile_dir
            .join(PROJECT)
            .join(SOLUTION)
            .join("csim/build/csim.exe");
        // The tool can exit 0 after a failed build; the binary is the evidence.
        if compile.succeeded() && !binary.is_file() {
            compile.return_code = 1;
            compile.stderr.push_str("\n[hlseval] csim.exe was not produced\n");
        }
        if !compile.succeeded() {
            return Ok(CsimOutcome { compile, run: None });
        }

        let run_dir = fresh_stage_dir(work_root, Stage::Run)?;
        copy_into(&design.design_dir, design.data_files(), &run_dir)?;
        let mut cmd = Command::new(&binary);
        cmd.current_dir(&run_dir);
        let run = execute(Stage::Run, cmd, &run_dir, self.timeouts.run, &binary)?;
        Ok(CsimOutcome {
            compile,
            run: Some(run),
        })
    }

    pub fn synth(&self, design: &Design, work_root: &Path) -> Result<SynthOutcome, ToolError> {
        let dir = fresh_stage_dir(work_root, Stage::Synth)?;
        copy_into(&design.design_dir, &design.source_files, &dir)?;
        let script = self.script(design, ScriptAction::Synthesize);
        let exec = self.run_script(Stage::Synth, &dir, &script, self.timeouts.synth)?;
        let report_path = dir
            .join(PROJECT)
            .join(SOLUTION)
            .join("syn/report")
            .join(format!("{}_csynth.rpt", design.top_name));
        let report = if exec.succeeded() {
            fs::read_to_string(&report_path)
                .ok()
                .map(|t| parse_synth_report(&t))
        } else {
            None
        };
        Ok(SynthOutcome { exec, report })
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    /// A stand-in for the vendor tool: echoes its script and fabricates the
    /// artifacts a successful run leaves behind.
    fn fake_tool(dir: &Path) -> PathBuf {
        let p = dir.join("vitis_hls");
        fs::write(
            &p,
            "#!/bin/sh\n\
             cat \"$2\"\n\
             if grep -q csim_design \"$2\"; then\n\
               mkdir -p proj/solution1/csim/build\n\
               printf '#!/bin/sh\\necho ran in $(pwd)\\n' > proj/solution1/csim/build/csim.exe\n\
               chmod +x proj/solution1/csim/build/csim.exe\n\
             else\n\
               mkdir -p proj/solution1/syn/report\n\
               printf '|  Latency (cycles) |\\n|   min   |   max   |\\n+--+\\n|  3|  5|\\n' > proj/solution1/syn/report/k_csynth.rpt\n\
             fi\n",
        )
        .unwrap();
        fs::set_permissions(&p, fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    #[test]
    fn drives_scripts_and_reads_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        fs::create_dir_all(&src).unwrap();
        for (n, t) in [("k.h", "int k();"), ("k.cpp", "int k(){return 1;}"), ("k_tb.cpp", "int main(){}"), ("in.dat", "1")] {
            fs::write(src.join(n), t).unwrap();
        }
        let design = Design {
            design_dir: src,
            source_files: vec!["k.h".into(), "k.cpp".into()],
            not_source_files: vec!["k_tb.cpp".into(), "in.dat".into()],
            top_name: "k".into(),
        };
        let mut tool = VendorHls::new(fake_tool(tmp.path()));
        tool.part = Some("xc7z020clg400-1".into());
        let work = tmp.path().join("w");

        let cs = tool.csim(&design, &work).unwrap();
        assert!(cs.compile.stdout.contains("csim_design -setup"));
        assert!(cs.compile.stdout.contains("set_part {xc7z020clg400-1}"));
        let run = cs.run.unwrap();
        assert!(run.succeeded());
        assert!(work.join("run/in.dat").is_file());

        let sy = tool.synth(&design, &work).unwrap();
        assert!(sy.exec.stdout.contains("csynth_design"));
        assert!(!sy.exec.stdout.contains("k_tb.cpp"));
        assert_eq!(sy.report.unwrap().latency_cycles, Some(5));
    }

    #[test]
    fn missing_tool_is_a_config_error() {
        let tmp = tempfile::tempdir().unwrap();
        let tool = VendorHls::new(tmp.path().join("absent"));
        let design = Design {
            design_dir: tmp.path().to_path_buf(),
            source_files: vec![],
            not_source_files: vec![],
            top_name: "k".into(),
        };
        assert!(matches!(tool.synth(&design, &tmp.path().join("w")), Err(ToolError::Config(_))));
    }
}
