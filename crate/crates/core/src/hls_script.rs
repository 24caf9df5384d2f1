// SPDX-License-Identifier: Apache-2.0

//! Tcl batch scripts for the vendor HLS tool.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptAction {
    /// Build the C-simulation binary without running it (`csim_design -setup`).
    CsimSetup,
    /// Run high-level synthesis (`csynth_design`).
    Synthesize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptSpec<'a> {
    pub project: &'a str,
    pub solution: &'a str,
    pub top: &'a str,
    /// Design sources, relative to the directory the tool runs in.
    pub sources: Vec<&'a str>,
    /// Testbench and the files it reads.
    pub testbench_files: Vec<&'a str>,
    pub part: Option<&'a str>,
    pub clock_period_ns: Option<f64>,
    pub cflags: Option<&'a str>,
    pub action: ScriptAction,
}

/// Wraps a Tcl word in braces so whitespace and `$`/`[` stay literal.
fn tcl_word(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('{');
    out.push_str(s);
    out.push('}');
    out
}

pub fn generate_script(spec: &ScriptSpec<'_>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "open_project -reset {}", tcl_word(spec.project));
    let _ = writeln!(s, "set_top {}", spec.top);
    for src in &spec.sources {
        match spec.cflags {
            Some(flags) => {
                let _ = writeln!(s, "add_files {} -cflags {}", tcl_word(src), tcl_word(flags));
            }
            None => {
                let _ = writeln!(s, "add_files {}", tcl_word(src));
            }
        }
    }
    for tb in &spec.testbench_files {
        let _ = writeln!(s, "add_files -tb {}", tcl_word(tb));
    }
    let _ = writeln!(s, "open_solution -reset {} -flow_target vivado", tcl_word(spec.solution));
    if let Some(part) = spec.part {
        let _ = writeln!(s, "set_part {}", tcl_word(part));
    }
    if let Some(period) = spec.clock_period_ns {
        let _ = writeln!(s, "create_clock -period {period} -name default");
    }
    match spec.action {
        ScriptAction::CsimSetup => s.push_str("csim_design -setup\n"),
        ScriptAction::Synthesize => s.push_str("csynth_design\n"),
    }
    s.push_str("exit\n");
    s
}
