// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use hlseval_core::mock::MockPlan;
use hlseval_core::synth_report::parse_synth_report;

use super::{fresh_stage_dir, io_err, CsimOutcome, Stage, SynthOutcome, ToolError, ToolExecution};
use crate::case::Design;

pub const MOCK_REPORT_FILE: &str = "mock_csynth.rpt";

/// Toolchain whose outcomes are dictated by `// MOCK:` markers in the
/// design sources. Nothing is compiled; outputs are deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockToolchain;

fn mock_exec(stage: Stage, dir: &Path, code: i32, plan: &MockPlan, stdout: String) -> ToolExecution {
    let start = Instant::now();
    if plan.delay_ms > 0 {
        thread::sleep(Duration::from_millis(plan.delay_ms));
    }
    ToolExecution {
        stage,
        return_code: code,
        stdout,
        stderr: if code == 0 {
            String::new()
        } else {
            format!("mock {} failure (code {code})\n", stage.as_str())
        },
        duration: start.elapsed().as_secs_f64(),
        workdir: dir.to_path_buf(),
    }
}

fn plan_for(design: &Design) -> Result<MockPlan, ToolError> {
    let code = design.read_code()?;
    Ok(MockPlan::from_sources(code.iter().map(String::as_str)))
}

fn mini_report(top: &str, latency: u64) -> String {
    format!(
        "== Vitis HLS Report for '{top}'\n\
+ Latency:\n\
    * Summary:\n\
    +---------+---------+-----------+-----------+-----+-----+---------+\n\
    |  Latency (cycles) |   Latency (absolute)  |  Interval | Pipeline|\n\
    |   min   |   max   |    min    |    max    | min | max |   Type  |\n\
    +---------+---------+-----------+-----------+-----+-----+---------+\n\
    |{latency:>9}|{latency:>9}|          -|          -|    -|    -|       no|\n\
    +---------+---------+-----------+-----------+-----+-----+---------+\n"
    )
}

impl MockToolchain {
    pub fn csim(&self, design: &Design, work_root: &Path) -> Result<CsimOutcome, ToolError> {
        let plan = plan_for(design)?;
        let compile_dir = fresh_stage_dir(work_root, Stage::Compile)?;
        let compile = mock_exec(
            Stage::Compile,
            &compile_dir,
            if plan.compile_ok { 0 } else { 1 },
            &plan,
            String::new(),
        );
        if !compile.succeeded() {
            return Ok(CsimOutcome { compile, run: None });
        }
        let run_dir = fresh_stage_dir(work_root, Stage::Run)?;
        let verdict = if plan.run_code == 0 {
            "All tests PASSED.\n"
        } else {
            "Some tests FAILED.\n"
        };
        let run = mock_exec(Stage::Run, &run_dir, plan.run_code, &plan, verdict.into());
        Ok(CsimOutcome {
            compile,
            run: Some(run),
        })
    }

    pub fn synth(&self, design: &Design, work_root: &Path) -> Result<SynthOutcome, ToolError> {
        let plan = plan_for(design)?;
        let dir = fresh_stage_dir(work_root, Stage::Synth)?;
        let exec = mock_exec(
            Stage::Synth,
            &dir,
            if plan.synth_ok { 0 } else { 1 },
            &plan,
            String::new(),
        );
        let report = if exec.succeeded() {
            let text = mini_report(&design.top_name, plan.latency);
            let path = dir.join(MOCK_REPORT_FILE);
            fs::write(&path, &text).map_err(io_err(&path))?;
            Some(parse_synth_report(&text))
        } else {
            None
        };
        Ok(SynthOutcome { exec, report })
    }
}
