// SPDX-License-Identifier: Apache-2.0

//! Pure, allocation-only building blocks for evaluating LLM-generated
//! high-level-synthesis (HLS) code.
//!
//! Nothing in this crate touches the filesystem, spawns processes, or
//! talks to the network. The `hlseval` crate layers those on top.
//!
//! - [`passk`]: the unbiased pass@k estimator and per-case averaging.
//! - [`prompts`]: the prompt templates and the prompt builders.
//! - [`extract`]: `<OUTPUT_CODE>` block extraction from model responses.
//! - [`score`]: the four gated metrics of a sample.
//! - [`table`]: metric tables and their markdown rendering.
//! - [`synth_report`]: HLS synthesis report parsing.
//! - [`mock`]: the marker-comment grammar driving the mock toolchain.
//! - [`hls_script`]: batch script generation for the vendor HLS tool.
//! - [`construct`]: response parsers for benchmark construction.
//! - [`files`]: filename roles and small C++ source scanning helpers.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod construct;
pub mod extract;
pub mod files;
pub mod hls_script;
pub mod mock;
pub mod passk;
pub mod prompts;
pub mod score;
pub mod synth_report;
pub mod table;

pub use extract::{parse_output, FileMap, OutputKind, ParseError};
pub use passk::{pass_at_k, PassAtKError};
pub use prompts::{EditTask, TaskId, TemplateId};
pub use score::{Metric, SampleFlags};
