// SPDX-License-Identifier: Apache-2.0

//! Evaluation of LLMs on high-level synthesis design tasks.

pub mod case;
pub mod cli;
pub mod construct;
pub mod engine;
pub mod evaluator;
pub mod llm;
pub mod report;
pub mod toolchain;
