//! Minimal INI reader/writer: `[section]` headers, `key = value` lines and `#`
//! comments. Line numbers are kept for error reporting.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    /// Leading comment lines (without the `#`).
    pub header: Vec<String>,
    pub sections: Vec<Section>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

pub fn parse(text: &str) -> Result<Document> {
    let mut doc = Document::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(c) = s.strip_prefix('#') {
            if doc.sections.is_empty() {
                doc.header.push(c.strip_prefix(' ').unwrap_or(c).to_string());
            }
            continue;
        }
        let s = s.split(" #").next().unwrap_or(s).trim();
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, detail: "unterminated section header".into() })?
                .trim();
            if !valid_name(name) {
                return Err(Error::Parse { line, detail: format!("bad section name `{name}`") });
            }
            if doc.sections.iter().any(|x| x.name == name) {
                return Err(Error::Parse { line, detail: format!("duplicate section [{name}]") });
            }
            doc.sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, detail: format!("expected `key = value`, got `{s}`") })?;
        let (k, v) = (k.trim(), v.trim());
        if !valid_name(k) {
            return Err(Error::Parse { line, detail: format!("bad key `{k}`") });
        }
        let sec = doc
            .sections
            .last_mut()
            .ok_or_else(|| Error::Parse { line, detail: "key outside any section".into() })?;
        if sec.entries.iter().any(|e| e.key == k) {
            return Err(Error::Parse { line, detail: format!("duplicate key `{k}`") });
        }
        sec.entries.push(Entry { key: k.to_string(), value: v.to_string(), line });
    }
    Ok(doc)
}

pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    for h in &doc.header {
        out.push_str(&format!("# {h}\n").replace("# \n", "#\n"));
    }
    for s in &doc.sections {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("[{}]\n", s.name));
        for e in &s.entries {
            out.push_str(&format!("{} = {}\n", e.key, e.value));
        }
    }
    out
}
