// SPDX-License-Identifier: Apache-2.0

//! Parsers for the responses of the benchmark-construction prompts.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::files::contains_token;

/// Section markers a generated description must contain.
pub const DESCRIPTION_MARKERS: [&str; 4] = [
    "Kernel Description:",
    "Top-Level Function:",
    "Inputs:",
    "Outputs:",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructParseError {
    #[error("response contains no fenced code block")]
    NoFencedBlock,
    #[error("description is missing sections: {}", .0.join(", "))]
    MissingSections(Vec<&'static str>),
}

/// Contents of the first fenced (```) block; an info string such as
/// `markdown` or `cpp` on the opening fence is dropped.
pub fn extract_fenced_block(text: &str) -> Result<&str, ConstructParseError> {
    let open = text.find("```").ok_or(ConstructParseError::NoFencedBlock)?;
    let after_open = &text[open + 3..];
    let body_start = after_open.find('\n').ok_or(ConstructParseError::NoFencedBlock)? + 1;
    let body = &after_open[body_start..];
    let mut offset = 0;
    for line in body.split_inclusive('\n') {
        if line.trim_start().starts_with("```") {
            let inner = &body[..offset];
            return Ok(inner.strip_suffix('\n').unwrap_or(inner));
        }
        offset += line.len();
    }
    Err(ConstructParseError::NoFencedBlock)
}

/// Names in a flat markdown list such as "- `name`".
///
/// A `None` item yields nothing.
pub fn parse_name_list(block: &str) -> Vec<String> {
    let mut names = Vec::new();
    for line in block.lines() {
        let Some(item) = line.trim().strip_prefix(['-', '*']) else {
            continue;
        };
        let item = item.trim();
        let name = match item.strip_prefix('`') {
            Some(rest) => rest.split('`').next().unwrap_or(""),
            None => item.split_whitespace().next().unwrap_or(""),
        };
        let name = name.trim_end_matches(['(', ')', ':', ',']);
        if name.is_empty() || name.eq_ignore_ascii_case("none") || name == "..." {
            continue;
        }
        if !names.iter().any(|n: &String| n == name) {
            names.push(name.to_string());
        }
    }
    names
}

/// Sub-component names split into those found in the source and those the
/// model made up. The top function never appears in either list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subcomponents {
    pub kept: Vec<String>,
    pub rejected: Vec<String>,
}

pub fn filter_subcomponents(names: Vec<String>, source: &str, top_name: &str) -> Subcomponents {
    let mut out = Subcomponents::default();
    for name in names {
        if name == top_name {
            continue;
        }
        if contains_token(source, &name) {
            out.kept.push(name);
        } else {
            out.rejected.push(name);
        }
    }
    out
}

pub fn parse_hierarchy_response(
    response: &str,
    source: &str,
    top_name: &str,
) -> Result<Subcomponents, ConstructParseError> {
    let block = extract_fenced_block(response)?;
    Ok(filter_subcomponents(parse_name_list(block), source, top_name))
}

/// Markers absent from a description, in scaffold order.
pub fn missing_description_sections(description: &str) -> Vec<&'static str> {
    DESCRIPTION_MARKERS
        .iter()
        .copied()
        .filter(|m| !description.contains(m))
        .collect()
}

pub fn parse_description_response(response: &str) -> Result<String, ConstructParseError> {
    let block = extract_fenced_block(response)?;
    let missing = missing_description_sections(block);
    if !missing.is_empty() {
        return Err(ConstructParseError::MissingSections(missing));
    }
    let mut text = block.to_string();
    text.push('\n');
    Ok(text)
}

pub fn parse_testbench_response(response: &str) -> Result<String, ConstructParseError> {
    let block = extract_fenced_block(response)?;
    if block.trim().is_empty() {
        return Err(ConstructParseError::NoFencedBlock);
    }
    let mut text = block.to_string();
    text.push('\n');
    Ok(text)
}
