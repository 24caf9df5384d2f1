// SPDX-License-Identifier: Apache-2.0

//! Marker comments that script the mock toolchain.
//!
//! A marker is a line comment of the form `// MOCK:<key>=<value>`:
//!
//! | key        | values             | effect                                   |
//! |------------|--------------------|------------------------------------------|
//! | `compile`  | `ok`, `fail`       | compile stage exit code 0 or 1           |
//! | `run`      | `ok`, `fail`, int  | testbench exit code (`fail` = 1)         |
//! | `synth`    | `ok`, `fail`       | synthesis exit code 0 or 1               |
//! | `latency`  | int                | latency reported on synthesis success    |
//! | `delay_ms` | int                | wall time each stage spends              |
//!
//! Unknown keys and unparseable values are ignored. When a key appears more
//! than once the last occurrence wins.

use serde::{Deserialize, Serialize};

pub const DEFAULT_MOCK_LATENCY: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockPlan {
    pub compile_ok: bool,
    pub run_code: i32,
    pub synth_ok: bool,
    pub latency: u64,
    pub delay_ms: u64,
}

impl Default for MockPlan {
    fn default() -> Self {
        MockPlan {
            compile_ok: true,
            run_code: 0,
            synth_ok: true,
            latency: DEFAULT_MOCK_LATENCY,
            delay_ms: 0,
        }
    }
}

fn ok_fail(v: &str) -> Option<bool> {
    match v {
        "ok" => Some(true),
        "fail" => Some(false),
        _ => None,
    }
}

impl MockPlan {
    /// Folds the markers found in one source text into `self`.
    pub fn scan(mut self, source: &str) -> Self {
        for line in source.lines() {
            let Some(idx) = line.find("//") else { continue };
            let comment = line[idx + 2..].trim_start();
            let Some(marker) = comment.strip_prefix("MOCK:") else {
                continue;
            };
            let marker = marker.split_whitespace().next().unwrap_or("");
            let Some((key, value)) = marker.split_once('=') else {
                continue;
            };
            match key {
                "compile" => {
                    if let Some(b) = ok_fail(value) {
                        self.compile_ok = b;
                    }
                }
                "run" => {
                    if let Some(b) = ok_fail(value) {
                        self.run_code = if b { 0 } else { 1 };
                    } else if let Ok(code) = value.parse() {
                        self.run_code = code;
                    }
                }
                "synth" => {
                    if let Some(b) = ok_fail(value) {
                        self.synth_ok = b;
                    }
                }
                "latency" => {
                    if let Ok(n) = value.parse() {
                        self.latency = n;
                    }
                }
                "delay_ms" => {
                    if let Ok(n) = value.parse() {
                        self.delay_ms = n;
                    }
                }
                _ => {}
            }
        }
        self
    }

    /// Scans every source in order.
    pub fn from_sources<'a>(sources: impl IntoIterator<Item = &'a str>) -> Self {
        sources.into_iter().fold(MockPlan::default(), MockPlan::scan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unmarked_source_succeeds() {
        assert_eq!(MockPlan::from_sources(["int main() {}"]), MockPlan::default());
    }

    #[test]
    fn run_marker() {
        let plan = MockPlan::from_sources(["void k() {}\n// MOCK:run=1\n"]);
        assert!(plan.compile_ok);
        assert_eq!(plan.run_code, 1);
        assert!(plan.synth_ok);
    }

    #[test]
    fn compile_and_synth_markers() {
        let plan = MockPlan::from_sources(["x; // MOCK:compile=fail", "// MOCK:synth=fail\n// MOCK:latency=7"]);
        assert!(!plan.compile_ok);
        assert!(!plan.synth_ok);
        assert_eq!(plan.latency, 7);
    }

    #[test]
    fn ignores_noise() {
        let plan = MockPlan::from_sources(["// MOCK:run=banana\n// MOCK:other=1\n/* MOCK:run=3 */\n// MOCK:delay_ms=5"]);
        assert_eq!(plan.run_code, 0);
        assert_eq!(plan.delay_ms, 5);
    }
}
