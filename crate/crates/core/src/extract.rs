// SPDX-License-Identifier: Apache-2.0

//! Extraction of `<OUTPUT_CODE name="...">...</OUTPUT_CODE>` blocks from raw
//! model responses.
//!
//! The grammar is deliberately strict: an opening tag is `<OUTPUT_CODE`,
//! whitespace, `name="<bare filename>"`, optional whitespace, `>`. Any
//! malformed, nested, unclosed, or stray tag rejects the whole response, so a
//! damaged response can never yield a file map with content spliced across
//! blocks. Text outside blocks is ignored.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use thiserror::Error;

use crate::files::{classify, is_bare_filename, FileRole};

/// Filename to file content.
pub type FileMap = BTreeMap<String, String>;

const OPEN: &str = "<OUTPUT_CODE";
const CLOSE: &str = "</OUTPUT_CODE>";

/// Which set of blocks a response must contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// At least one kernel source (`.cpp`, not `_tb.cpp`).
    Generation,
    /// Exactly one header, exactly one testbench, one or more kernel sources.
    Edit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no <OUTPUT_CODE> blocks found")]
    NoBlocks,
    #[error("malformed opening tag at byte {offset}: {reason}")]
    MalformedOpenTag { offset: usize, reason: &'static str },
    #[error("block `{name}` is never closed")]
    Unclosed { name: String },
    #[error("closing tag at byte {offset} has no matching opening tag")]
    StrayClose { offset: usize },
    #[error("invalid filename `{0}` (must be a bare filename)")]
    BadFilename(String),
    #[error("duplicate block for `{0}`")]
    DuplicateFilename(String),
    #[error("missing required {0} block")]
    MissingRole(&'static str),
    #[error("more than one {0} block")]
    ExtraRole(&'static str),
    #[error("unexpected block `{0}`")]
    UnexpectedFile(String),
}

/// Extracts all code blocks and checks the roles required by `kind`.
pub fn parse_output(raw: &str, kind: OutputKind) -> Result<FileMap, ParseError> {
    let files = extract_blocks(raw)?;
    check_roles(&files, kind)?;
    Ok(files)
}

/// Extracts all code blocks without any role checks.
pub fn extract_blocks(raw: &str) -> Result<FileMap, ParseError> {
    let mut files = FileMap::new();
    let mut pos = 0;
    loop {
        let next_open = raw[pos..].find(OPEN).map(|i| i + pos);
        let next_close = raw[pos..].find(CLOSE).map(|i| i + pos);
        let open = match (next_open, next_close) {
            (None, None) => break,
            (None, Some(c)) => return Err(ParseError::StrayClose { offset: c }),
            (Some(o), Some(c)) if c < o => return Err(ParseError::StrayClose { offset: c }),
            (Some(o), _) => o,
        };

        let (name, body_start) = parse_open_tag(raw, open)?;
        let close = raw[body_start..].find(CLOSE).map(|i| i + body_start);
        let nested = raw[body_start..].find(OPEN).map(|i| i + body_start);
        let close = match (close, nested) {
            (Some(c), Some(n)) if n < c => return Err(ParseError::Unclosed { name }),
            (Some(c), _) => c,
            (None, _) => return Err(ParseError::Unclosed { name }),
        };

        if !is_bare_filename(&name) {
            return Err(ParseError::BadFilename(name));
        }
        if files.contains_key(&name) {
            return Err(ParseError::DuplicateFilename(name));
        }
        let body = clean_body(&raw[body_start..close]);
        files.insert(name, body.to_string());
        pos = close + CLOSE.len();
    }
    if files.is_empty() {
        return Err(ParseError::NoBlocks);
    }
    Ok(files)
}

fn parse_open_tag(raw: &str, open: usize) -> Result<(String, usize), ParseError> {
    let bad = |reason| ParseError::MalformedOpenTag {
        offset: open,
        reason,
    };
    let rest = &raw[open + OPEN.len()..];
    let attrs = rest.trim_start_matches([' ', '\t']);
    if attrs.len() == rest.len() {
        return Err(bad("expected whitespace after tag name"));
    }
    let value = attrs
        .strip_prefix("name=\"")
        .ok_or_else(|| bad("expected name=\"...\""))?;
    let end = value
        .find(['"', '>', '\n', '<'])
        .ok_or_else(|| bad("unterminated name attribute"))?;
    if value.as_bytes()[end] != b'"' {
        return Err(bad("unterminated name attribute"));
    }
    let name = &value[..end];
    let after = value[end + 1..].trim_start_matches([' ', '\t']);
    let after = after
        .strip_prefix('>')
        .ok_or_else(|| bad("expected `>` after name attribute"))?;
    let body_start = raw.len() - after.len();
    Ok((name.to_string(), body_start))
}

/// Drops the newline after the opening tag and before the closing tag, and
/// unwraps a markdown fence if the whole body is one.
fn clean_body(body: &str) -> &str {
    let body = body
        .strip_prefix("\r\n")
        .or_else(|| body.strip_prefix('\n'))
        .unwrap_or(body);
    let body = body
        .strip_suffix("\r\n")
        .or_else(|| body.strip_suffix('\n'))
        .unwrap_or(body);
    unwrap_fence(body).unwrap_or(body)
}

fn unwrap_fence(body: &str) -> Option<&str> {
    let trimmed = body.trim();
    if !trimmed.starts_with("```") || !trimmed.ends_with("```") || trimmed.len() < 6 {
        return None;
    }
    let first_nl = trimmed.find('\n')?;
    let last_nl = trimmed.rfind('\n')?;
    if last_nl <= first_nl || trimmed[last_nl + 1..].trim() != "```" {
        return None;
    }
    Some(&trimmed[first_nl + 1..last_nl])
}

fn check_roles(files: &FileMap, kind: OutputKind) -> Result<(), ParseError> {
    let mut headers = 0;
    let mut kernels = 0;
    let mut testbenches = 0;
    for name in files.keys() {
        match classify(name) {
            FileRole::Header => headers += 1,
            FileRole::Kernel => kernels += 1,
            FileRole::Testbench => testbenches += 1,
            _ if kind == OutputKind::Edit => return Err(ParseError::UnexpectedFile(name.clone())),
            _ => {}
        }
    }
    if kernels == 0 {
        return Err(ParseError::MissingRole("kernel source"));
    }
    if kind == OutputKind::Edit {
        match headers {
            0 => return Err(ParseError::MissingRole("header")),
            1 => {}
            _ => return Err(ParseError::ExtraRole("header")),
        }
        match testbenches {
            0 => return Err(ParseError::MissingRole("testbench")),
            1 => {}
            _ => return Err(ParseError::ExtraRole("testbench")),
        }
    }
    Ok(())
}
