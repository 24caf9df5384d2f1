// SPDX-License-Identifier: Apache-2.0

//! The four gated metrics of a sample.

use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Parse,
    Compile,
    Run,
    Synth,
}

impl Metric {
    /// Report column order.
    pub const ALL: [Metric; 4] = [Metric::Parse, Metric::Compile, Metric::Run, Metric::Synth];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Parse => "Can Parse",
            Metric::Compile => "Can Compile",
            Metric::Run => "Can Pass TB",
            Metric::Synth => "Can Synth",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Parse => "parse",
            Metric::Compile => "compile",
            Metric::Run => "run",
            Metric::Synth => "synth",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Return codes observed for a sample; `None` means the stage never ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCodes {
    pub parsed: bool,
    pub compile: Option<i32>,
    pub run: Option<i32>,
    pub synth: Option<i32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleFlags {
    pub parseable: bool,
    pub compilable: bool,
    pub runnable: bool,
    pub synthesizable: bool,
}

impl SampleFlags {
    /// Applies the gating rules.
    ///
    /// A stage whose prerequisite failed counts as failed even if a code is
    /// present. Synthesis is gated on compilation only, not on the testbench.
    pub fn from_codes(codes: StageCodes) -> SampleFlags {
        let parseable = codes.parsed;
        let compilable = parseable && codes.compile == Some(0);
        let runnable = compilable && codes.run == Some(0);
        let synthesizable = compilable && codes.synth == Some(0);
        SampleFlags {
            parseable,
            compilable,
            runnable,
            synthesizable,
        }
    }

    pub fn get(&self, metric: Metric) -> bool {
        match metric {
            Metric::Parse => self.parseable,
            Metric::Compile => self.compilable,
            Metric::Run => self.runnable,
            Metric::Synth => self.synthesizable,
        }
    }

    /// Whether the flags satisfy the gating implications.
    pub fn is_consistent(&self) -> bool {
        (!self.compilable || self.parseable)
            && (!self.runnable || self.compilable)
            && (!self.synthesizable || self.compilable)
    }

    pub fn as_tuple(&self) -> (bool, bool, bool, bool) {
        (self.parseable, self.compilable, self.runnable, self.synthesizable)
    }
}
