// SPDX-License-Identifier: Apache-2.0

//! Filename roles and lightweight C++ source scanning.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub const TESTBENCH_SUFFIX: &str = "_tb.cpp";
pub const DESCRIPTION_FILE: &str = "kernel_description.md";
pub const MANIFEST_FILE: &str = "case.toml";

/// Role of a file inside an LLM-ready case, decided by its name alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileRole {
    Header,
    Kernel,
    Testbench,
    Description,
    Manifest,
    Aux,
}

pub fn classify(filename: &str) -> FileRole {
    if filename == DESCRIPTION_FILE {
        FileRole::Description
    } else if filename == MANIFEST_FILE {
        FileRole::Manifest
    } else if filename.ends_with(TESTBENCH_SUFFIX) {
        FileRole::Testbench
    } else if filename.ends_with(".h") || filename.ends_with(".hpp") {
        FileRole::Header
    } else if filename.ends_with(".cpp") {
        FileRole::Kernel
    } else {
        FileRole::Aux
    }
}

/// True for a plain filename: non-empty, no path separators, not `.`/`..`.
pub fn is_bare_filename(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.contains(['/', '\\', '\0'])
        && !name.chars().any(char::is_control)
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether `token` occurs in `text` delimited by non-identifier characters.
pub fn contains_token(text: &str, token: &str) -> bool {
    if token.is_empty() {
        return false;
    }
    text.match_indices(token).any(|(start, _)| {
        let before = text[..start].chars().next_back();
        let after = text[start + token.len()..].chars().next();
        !before.is_some_and(is_ident_char) && !after.is_some_and(is_ident_char)
    })
}

/// Removes `//` and `/* */` comments, keeping line structure.
pub fn strip_comments(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let mut chars = src.chars().peekable();
    let mut in_str: Option<char> = None;
    while let Some(c) = chars.next() {
        if let Some(q) = in_str {
            out.push(c);
            if c == '\\' {
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            } else if c == q {
                in_str = None;
            }
            continue;
        }
        match (c, chars.peek()) {
            ('/', Some('/')) => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                        break;
                    }
                }
            }
            ('/', Some('*')) => {
                chars.next();
                let mut prev = '\0';
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                    }
                    if prev == '*' && n == '/' {
                        break;
                    }
                    prev = n;
                }
                out.push(' ');
            }
            ('"' | '\'', _) => {
                in_str = Some(c);
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// Names of the functions declared or defined at file scope of a header.
///
/// Preprocessor lines, typedefs, and anything nested in braces are skipped.
pub fn declared_functions(header: &str) -> Vec<String> {
    let cleaned = strip_comments(header);
    let mut code = String::new();
    for line in cleaned.lines() {
        if !line.trim_start().starts_with('#') {
            code.push_str(line);
            code.push('\n');
        }
    }

    let mut names: Vec<String> = Vec::new();
    let mut depth = 0usize;
    let mut stmt = String::new();
    for c in code.chars() {
        match c {
            '{' => {
                if depth == 0 {
                    // A function definition body ends the head statement.
                    push_function_name(&stmt, &mut names);
                    stmt.clear();
                }
                depth += 1;
            }
            '}' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    stmt.clear();
                }
            }
            ';' if depth == 0 => {
                push_function_name(&stmt, &mut names);
                stmt.clear();
            }
            _ if depth == 0 => stmt.push(c),
            _ => {}
        }
    }
    names
}

fn push_function_name(stmt: &str, names: &mut Vec<String>) {
    let stmt = stmt.trim();
    let first_word = stmt.split_whitespace().next().unwrap_or("");
    if matches!(
        first_word,
        "typedef" | "using" | "struct" | "class" | "enum" | "union" | "namespace" | "template"
    ) {
        return;
    }
    let Some(paren) = stmt.find('(') else {
        return;
    };
    let head = &stmt[..paren];
    if head.contains('=') {
        return;
    }
    let name: String = head
        .trim_end()
        .chars()
        .rev()
        .take_while(|&c| is_ident_char(c))
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
        return;
    }
    if !names.contains(&name) {
        names.push(name);
    }
}

/// The single function declared in `header`, if there is exactly one.
pub fn infer_top_name(header: &str) -> Option<String> {
    let names = declared_functions(header);
    match names.as_slice() {
        [only] => Some(only.to_string()),
        _ => None,
    }
}
