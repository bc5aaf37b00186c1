//! Turning an unstructured design document into the seven-label structured
//! specification handed to the language model.
//!
//! Extraction is a deterministic heading split; labeling is driven by an
//! explicit map from normalized headings to labels, so every field of the
//! result can be traced back to a section of the source document.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("specification document is empty")]
    EmptyDocument,
    #[error("invalid design name '{0}': expected [A-Za-z_][A-Za-z0-9_]*")]
    InvalidDesignName(String),
    #[error("no section maps to functional_requirements, or it produced no entries")]
    MissingFunctionalRequirements,
    #[error("unknown label '{0}' in label map")]
    UnknownLabel(String),
    #[error("invalid heading pattern: {0}")]
    InvalidPattern(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at '{key}': {reason}")]
    Schema { key: String, reason: String },
    #[error("failed to read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl SpecError {
    fn schema(key: &str, reason: impl Into<String>) -> Self {
        SpecError::Schema {
            key: key.to_owned(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub source_path: PathBuf,
    pub body: String,
    pub design_name: String,
}

impl SpecDocument {
    pub fn new(
        source_path: impl Into<PathBuf>,
        body: impl Into<String>,
        design_name: impl Into<String>,
    ) -> Result<Self, SpecError> {
        let doc = SpecDocument {
            source_path: source_path.into(),
            body: body.into(),
            design_name: design_name.into(),
        };
        if doc.body.trim().is_empty() {
            return Err(SpecError::EmptyDocument);
        }
        if !is_identifier(&doc.design_name) {
            return Err(SpecError::InvalidDesignName(doc.design_name));
        }
        Ok(doc)
    }

    pub fn read(path: &Path, design_name: &str) -> Result<Self, SpecError> {
        let body = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        SpecDocument::new(path, body, design_name)
    }
}

/// One heading-delimited section. `raw_heading` is the exact heading text
/// (marker line, plus underline for setext titles) so that concatenating
/// `raw_heading + content` over all sections reproduces the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    /// Normalized: lowercase, whitespace runs collapsed to `_`.
    pub heading: String,
    pub title: String,
    pub raw_heading: String,
    pub content: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractWarning {
    /// No heading marker found; the whole body became the `preamble` section.
    NoSections,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnformattedExtract {
    pub sections: Vec<Section>,
    pub warnings: Vec<ExtractWarning>,
}

impl UnformattedExtract {
    pub fn headings(&self) -> Vec<&str> {
        self.sections.iter().map(|s| s.heading.as_str()).collect()
    }

    pub fn section(&self, heading: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.heading == heading)
    }
}

pub fn normalize_heading(title: &str) -> String {
    title
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

/// How heading lines are recognized.
#[derive(Debug, Clone, Default)]
pub enum HeadingPattern {
    /// `#`-prefixed lines and setext titles underlined with `===` or `---`.
    #[default]
    Markdown,
    /// A single-line regex; the `title` group (or the whole match) is the title.
    Custom(Regex),
}

impl HeadingPattern {
    pub fn custom(pattern: &str) -> Result<Self, SpecError> {
        Regex::new(pattern)
            .map(HeadingPattern::Custom)
            .map_err(|e| SpecError::InvalidPattern(e.to_string()))
    }
}

fn atx_title(line: &str) -> Option<&str> {
    let rest = line.trim_end().strip_prefix('#')?;
    let rest = rest.trim_start_matches('#');
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let title = rest.trim().trim_end_matches('#').trim();
    (!title.is_empty()).then_some(title)
}

fn is_underline(line: &str) -> bool {
    let t = line.trim_end();
    t.len() >= 3 && (t.bytes().all(|b| b == b'=') || t.bytes().all(|b| b == b'-'))
}

/// Splits the document at heading markers. Text before the first heading
/// becomes a `preamble` section; repeated headings get `_2`, `_3` suffixes.
pub fn extract(doc: &SpecDocument) -> Result<UnformattedExtract, SpecError> {
    extract_with(doc, &HeadingPattern::default())
}

pub fn extract_with(doc: &SpecDocument, pattern: &HeadingPattern) -> Result<UnformattedExtract, SpecError> {
    if doc.body.trim().is_empty() {
        return Err(SpecError::EmptyDocument);
    }
    let lines: Vec<&str> = doc.body.split_inclusive('\n').collect();
    // (title, number of lines consumed by the heading)
    let heading_at = |i: usize| -> Option<(String, usize)> {
        let line = lines[i].trim_end_matches(['\n', '\r']);
        match pattern {
            HeadingPattern::Markdown => {
                if let Some(t) = atx_title(line) {
                    return Some((t.to_owned(), 1));
                }
                let next = lines.get(i + 1)?;
                let trimmed = line.trim();
                let is_item = trimmed.starts_with(['-', '*', '+', '|']);
                if !trimmed.is_empty() && !is_item && is_underline(next.trim_end_matches(['\n', '\r'])) {
                    return Some((trimmed.to_owned(), 2));
                }
                None
            }
            HeadingPattern::Custom(re) => {
                let caps = re.captures(line)?;
                let m = caps.name("title").unwrap_or_else(|| caps.get(0).expect("whole match"));
                let title = m.as_str().trim();
                (!title.is_empty()).then(|| (title.to_owned(), 1))
            }
        }
    };

    let mut sections: Vec<Section> = Vec::new();
    let mut current: Option<Section> = None;
    let mut preamble = String::new();
    let mut i = 0;
    while i < lines.len() {
        if let Some((title, span)) = heading_at(i) {
            if let Some(s) = current.take() {
                sections.push(s);
            }
            current = Some(Section {
                heading: normalize_heading(&title),
                title,
                raw_heading: lines[i..i + span].concat(),
                content: String::new(),
            });
            i += span;
            continue;
        }
        match current.as_mut() {
            Some(s) => s.content.push_str(lines[i]),
            None => preamble.push_str(lines[i]),
        }
        i += 1;
    }
    if let Some(s) = current.take() {
        sections.push(s);
    }

    let mut warnings = Vec::new();
    if sections.is_empty() {
        warnings.push(ExtractWarning::NoSections);
    }
    if !preamble.is_empty() {
        sections.insert(
            0,
            Section {
                heading: "preamble".into(),
                title: "preamble".into(),
                raw_heading: String::new(),
                content: preamble,
            },
        );
    }

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for s in &mut sections {
        let n = counts.entry(s.heading.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            s.heading = format!("{}_{}", s.heading, n);
        }
    }
    Ok(UnformattedExtract { sections, warnings })
}

/// The seven top-level labels, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Introduction,
    SystemOverview,
    Definitions,
    Parameters,
    FunctionalRequirements,
    TimingRequirements,
    ExtraInfo,
}

impl Label {
    pub const ALL: [Label; 7] = [
        Label::Introduction,
        Label::SystemOverview,
        Label::Definitions,
        Label::Parameters,
        Label::FunctionalRequirements,
        Label::TimingRequirements,
        Label::ExtraInfo,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Label::Introduction => "introduction",
            Label::SystemOverview => "system_overview",
            Label::Definitions => "definitions",
            Label::Parameters => "parameters",
            Label::FunctionalRequirements => "functional_requirements",
            Label::TimingRequirements => "timing_requirements",
            Label::ExtraInfo => "extra_info",
        }
    }
}

impl FromStr for Label {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.key() == s)
            .ok_or_else(|| SpecError::UnknownLabel(s.to_owned()))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Label → normalized source headings, in the order their contents are concatenated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap(BTreeMap<Label, Vec<String>>);

impl LabelMap {
    pub fn new() -> Self {
        LabelMap::default()
    }

    pub fn with(mut self, label: Label, headings: &[&str]) -> Self {
        self.0
            .entry(label)
            .or_default()
            .extend(headings.iter().map(|h| normalize_heading(h)));
        self
    }

    pub fn headings(&self, label: Label) -> &[String] {
        self.0.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    fn is_mapped(&self, heading: &str) -> bool {
        self.0.values().flatten().any(|h| h == heading)
    }

    pub fn from_json(value: &Value) -> Result<Self, SpecError> {
        let obj = value
            .as_object()
            .ok_or_else(|| SpecError::schema("label_map", "expected an object"))?;
        let mut map = LabelMap::new();
        for (key, v) in obj {
            let label: Label = key.parse()?;
            let headings: Vec<String> = match v {
                Value::String(s) => vec![s.clone()],
                Value::Array(items) => items
                    .iter()
                    .map(|i| {
                        i.as_str()
                            .map(str::to_owned)
                            .ok_or_else(|| SpecError::schema(key, "headings must be strings"))
                    })
                    .collect::<Result<_, _>>()?,
                _ => return Err(SpecError::schema(key, "expected a heading or list of headings")),
            };
            map.0
                .entry(label)
                .or_default()
                .extend(headings.iter().map(|h| normalize_heading(h)));
        }
        Ok(map)
    }
}

impl<'de> Deserialize<'de> for LabelMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        LabelMap::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Definition {
    pub term: String,
    pub meaning: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_or_value: Option<String>,
}

/// The structured specification. Empty text and empty lists stand for
/// absent labels and are omitted from the serialized form.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FormattedSpec {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub introduction: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub system_overview: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub definitions: Vec<Definition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<Parameter>,
    pub functional_requirements: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timing_requirements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_info: Option<String>,
}

fn check_entries(key: &str, entries: &[String]) -> Result<(), SpecError> {
    for (i, e) in entries.iter().enumerate() {
        if e.is_empty() {
            return Err(SpecError::schema(key, format!("entry {i} is empty")));
        }
        if e.trim() != e {
            return Err(SpecError::schema(key, format!("entry {i} has surrounding whitespace")));
        }
    }
    Ok(())
}

impl FormattedSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.functional_requirements.is_empty() {
            return Err(SpecError::schema("functional_requirements", "must contain at least one entry"));
        }
        check_entries("functional_requirements", &self.functional_requirements)?;
        check_entries("timing_requirements", &self.timing_requirements)?;
        if self.extra_info.as_deref() == Some("") {
            return Err(SpecError::schema("extra_info", "must be non-empty when present"));
        }
        Ok(())
    }
}

fn bullet_body(line: &str) -> Option<&str> {
    let t = line.trim_start();
    for marker in ["- ", "* ", "+ "] {
        if let Some(rest) = t.strip_prefix(marker) {
            return Some(rest.trim());
        }
    }
    let digits = t.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(r) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return Some(r.trim());
        }
    }
    None
}

fn split_sentences(text: &str) -> Vec<String> {
    let flat = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = flat.as_bytes();
    for (i, b) in bytes.iter().enumerate() {
        if matches!(b, b'.' | b'!' | b'?') && bytes.get(i + 1) == Some(&b' ') {
            out.push(flat[start..=i].trim().to_owned());
            start = i + 1;
        }
    }
    out.push(flat[start..].trim().to_owned());
    out.retain(|s| !s.is_empty());
    out
}

/// Splits requirement prose into entries at bullet boundaries when bullets
/// are present, otherwise at sentence boundaries. A lead-in line ending in
/// `:` directly before a list is dropped.
pub fn split_entries(text: &str) -> Vec<String> {
    let lines: Vec<&str> = text.lines().collect();
    if !lines.iter().any(|l| bullet_body(l).is_some()) {
        return split_sentences(text);
    }
    let mut out: Vec<String> = Vec::new();
    let mut prose = String::new();
    let mut in_bullet = false;
    for line in lines {
        if let Some(body) = bullet_body(line) {
            let lead = prose.trim();
            if !lead.is_empty() && !lead.ends_with(':') {
                out.extend(split_sentences(lead));
            }
            prose.clear();
            out.push(body.to_owned());
            in_bullet = true;
        } else if line.trim().is_empty() {
            in_bullet = false;
        } else if in_bullet {
            let last = out.last_mut().expect("bullet entry");
            last.push(' ');
            last.push_str(line.trim());
        } else {
            prose.push_str(line);
            prose.push('\n');
        }
    }
    if !prose.trim().is_empty() {
        out.extend(split_sentences(&prose));
    }
    out.retain(|s| !s.is_empty());
    out
}

fn parse_definitions(text: &str) -> Vec<Definition> {
    let mut out: Vec<Definition> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let body = bullet_body(line).unwrap_or(line);
        match body.split_once(':') {
            Some((term, meaning)) if !term.trim().is_empty() => out.push(Definition {
                term: term.trim().trim_matches('*').trim().to_owned(),
                meaning: meaning.trim().to_owned(),
            }),
            _ => match out.last_mut() {
                Some(prev) if bullet_body(line).is_none() => {
                    if !prev.meaning.is_empty() {
                        prev.meaning.push(' ');
                    }
                    prev.meaning.push_str(body);
                }
                _ => out.push(Definition {
                    term: body.to_owned(),
                    meaning: String::new(),
                }),
            },
        }
    }
    out
}

fn parse_parameters(text: &str) -> Vec<Parameter> {
    let bullet = Regex::new(
        r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*:\s*(?P<desc>.*?)\s*(?:\[(?P<value>[^\]]*)\])?$",
    )
    .expect("static regex");
    let mut out = Vec::new();
    let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    for (i, line) in rows.iter().enumerate() {
        if line.starts_with('|') {
            let cells: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
            let is_separator = cells.iter().all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':')));
            let is_header = rows
                .get(i + 1)
                .is_some_and(|n| n.starts_with('|') && n.contains("---"));
            if is_separator || is_header || cells.len() < 2 {
                continue;
            }
            out.push(Parameter {
                name: cells[0].to_owned(),
                description: cells[1].to_owned(),
                width_or_value: cells.get(2).filter(|c| !c.is_empty()).map(|c| (*c).to_owned()),
            });
        } else {
            let body = bullet_body(line).unwrap_or(line);
            if let Some(c) = bullet.captures(body) {
                out.push(Parameter {
                    name: c["name"].to_owned(),
                    description: c["desc"].to_owned(),
                    width_or_value: c.name("value").map(|m| m.as_str().trim().to_owned()),
                });
            }
        }
    }
    out
}

/// Assembles the structured spec from extracted sections. Sections not named
/// in the label map land in `extra_info` prefixed with their heading.
pub fn to_formatted(extract: &UnformattedExtract, label_map: &LabelMap) -> Result<FormattedSpec, SpecError> {
    let gather = |label: Label| -> String {
        label_map
            .headings(label)
            .iter()
            .filter_map(|h| extract.section(h))
            .map(|s| s.content.trim())
            .filter(|c| !c.is_empty())
            .collect::<Vec<_>>()
            .join("\n\n")
    };

    let functional_requirements = split_entries(&gather(Label::FunctionalRequirements));
    if functional_requirements.is_empty() {
        return Err(SpecError::MissingFunctionalRequirements);
    }

    let mut extra: Vec<String> = Vec::new();
    let mapped_extra = gather(Label::ExtraInfo);
    if !mapped_extra.is_empty() {
        extra.push(mapped_extra);
    }
    for s in &extract.sections {
        let content = s.content.trim();
        if !label_map.is_mapped(&s.heading) && !content.is_empty() {
            extra.push(format!("{}: {}", s.heading, content));
        }
    }

    let spec = FormattedSpec {
        introduction: gather(Label::Introduction),
        system_overview: gather(Label::SystemOverview),
        definitions: parse_definitions(&gather(Label::Definitions)),
        parameters: parse_parameters(&gather(Label::Parameters)),
        functional_requirements,
        timing_requirements: split_entries(&gather(Label::TimingRequirements)),
        extra_info: (!extra.is_empty()).then(|| extra.join("\n\n")),
    };
    spec.validate()?;
    Ok(spec)
}

/// Canonical `.spec.json` text: keys in label order, absent labels omitted,
/// two-space indentation, trailing newline.
pub fn serialize_spec(spec: &FormattedSpec) -> String {
    let mut text = serde_json::to_string_pretty(spec).expect("spec serializes");
    text.push('\n');
    text
}

pub fn deserialize_spec(text: &str) -> Result<FormattedSpec, SpecError> {
    let value: Value = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| SpecError::schema("<root>", "expected an object"))?;
    for key in obj.keys() {
        if key.parse::<Label>().is_err() {
            return Err(SpecError::schema(key, "unknown key"));
        }
    }
    if !obj.contains_key("functional_requirements") {
        return Err(SpecError::schema("functional_requirements", "missing required key"));
    }
    let mut spec = FormattedSpec::default();
    for (key, v) in obj {
        let err = |e: serde_json::Error| SpecError::schema(key, e.to_string());
        match key.parse::<Label>().expect("checked above") {
            Label::Introduction => spec.introduction = serde_json::from_value(v.clone()).map_err(err)?,
            Label::SystemOverview => spec.system_overview = serde_json::from_value(v.clone()).map_err(err)?,
            Label::Definitions => spec.definitions = serde_json::from_value(v.clone()).map_err(err)?,
            Label::Parameters => spec.parameters = serde_json::from_value(v.clone()).map_err(err)?,
            Label::FunctionalRequirements => {
                spec.functional_requirements = serde_json::from_value(v.clone()).map_err(err)?
            }
            Label::TimingRequirements => {
                spec.timing_requirements = serde_json::from_value(v.clone()).map_err(err)?
            }
            Label::ExtraInfo => spec.extra_info = serde_json::from_value(v.clone()).map_err(err)?,
        }
    }
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(body: &str) -> SpecDocument {
        SpecDocument::new("mem.md", body, "dut").unwrap()
    }

    #[test]
    fn splits_on_atx_headings_in_order() {
        let x = extract(&doc("# Introduction\nA timer.\n## Theory of Operation\nIt counts.\n# Registers\nCTRL\n")).unwrap();
        assert_eq!(x.headings(), vec!["introduction", "theory_of_operation", "registers"]);
        assert_eq!(x.sections[1].content, "It counts.\n");
        assert!(x.warnings.is_empty());
    }

    #[test]
    fn no_headings_yields_preamble_with_warning() {
        let x = extract(&doc("just text\nmore text")).unwrap();
        assert_eq!(x.headings(), vec!["preamble"]);
        assert_eq!(x.sections[0].content, "just text\nmore text");
        assert_eq!(x.warnings, vec![ExtractWarning::NoSections]);
    }

    #[test]
    fn setext_titles_and_preamble() {
        let x = extract(&doc("intro line\n\nOverview\n========\nbody\n")).unwrap();
        assert_eq!(x.headings(), vec!["preamble", "overview"]);
        assert_eq!(x.sections[1].raw_heading, "Overview\n========\n");
    }

    #[test]
    fn blank_document_is_rejected() {
        assert_eq!(SpecDocument::new("x", "  \n", "d"), Err(SpecError::EmptyDocument));
        assert!(matches!(SpecDocument::new("x", "a", "9bad"), Err(SpecError::InvalidDesignName(_))));
    }

    #[test]
    fn repeated_headings_are_suffixed() {
        let x = extract(&doc("# Notes\na\n# Notes\nb\n")).unwrap();
        assert_eq!(x.headings(), vec!["notes", "notes_2"]);
    }

    #[test]
    fn custom_heading_pattern() {
        let p = HeadingPattern::custom(r"^SECTION (?P<title>.+)$").unwrap();
        let x = extract_with(&doc("SECTION One\na\nSECTION Two Parts\nb\n"), &p).unwrap();
        assert_eq!(x.headings(), vec!["one", "two_parts"]);
    }

    #[test]
    fn entries_split_at_bullets_or_sentences() {
        assert_eq!(
            split_entries("The block shall:\n- count up\n  on each tick\n- reset to 0\n"),
            vec!["count up on each tick", "reset to 0"]
        );
        assert_eq!(
            split_entries("It counts. It wraps at 12'hfff! Done"),
            vec!["It counts.", "It wraps at 12'hfff!", "Done"]
        );
        assert_eq!(split_entries("1. first\n2) second"), vec!["first", "second"]);
    }

    #[test]
    fn parameters_from_tables_and_bullets() {
        let p = parse_parameters("| Name | Description | Width |\n|---|---|---|\n| N_HARTS | harts | 1 |\n- prescaler: tick divider [12 bits]\n");
        assert_eq!(p.len(), 2);
        assert_eq!(p[0], Parameter { name: "N_HARTS".into(), description: "harts".into(), width_or_value: Some("1".into()) });
        assert_eq!(p[1].width_or_value.as_deref(), Some("12 bits"));
    }

    #[test]
    fn definitions_with_continuations() {
        let d = parse_definitions("- tick: one prescaled\n  clock pulse\n- mtime: 64-bit counter");
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].meaning, "one prescaled clock pulse");
    }

    #[test]
    fn unmapped_section_goes_to_extra_info() {
        let x = extract(&doc("# Functional\n- must count\n# Revision History\nv1 initial\n")).unwrap();
        let map = LabelMap::new().with(Label::FunctionalRequirements, &["functional"]);
        let spec = to_formatted(&x, &map).unwrap();
        assert_eq!(spec.extra_info.as_deref(), Some("revision_history: v1 initial"));
    }

    #[test]
    fn missing_functional_requirements() {
        let x = extract(&doc("# Intro\nhello\n")).unwrap();
        let map = LabelMap::new().with(Label::Introduction, &["intro"]);
        assert_eq!(to_formatted(&x, &map), Err(SpecError::MissingFunctionalRequirements));
    }

    #[test]
    fn label_map_rejects_unknown_labels() {
        let v = serde_json::json!({"functional_requirements": ["a"], "notes": "b"});
        assert_eq!(LabelMap::from_json(&v), Err(SpecError::UnknownLabel("notes".into())));
    }

    #[test]
    fn deserialize_rejects_unknown_key_and_empty_requirements() {
        let e = deserialize_spec(r#"{"functional_requirements": ["x"], "notes": "y"}"#).unwrap_err();
        assert!(matches!(e, SpecError::Schema { ref key, .. } if key == "notes"), "{e}");
        let e = deserialize_spec(r#"{"functional_requirements": []}"#).unwrap_err();
        assert!(matches!(e, SpecError::Schema { ref key, .. } if key == "functional_requirements"));
        let e = deserialize_spec("{\n  \"functional_requirements\": [\"x\",]\n}").unwrap_err();
        assert!(matches!(e, SpecError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn absent_extra_info_is_omitted() {
        let spec = FormattedSpec {
            functional_requirements: vec!["a".into()],
            ..Default::default()
        };
        let text = serialize_spec(&spec);
        assert_eq!(text, "{\n  \"functional_requirements\": [\n    \"a\"\n  ]\n}\n");
        assert_eq!(deserialize_spec(&text).unwrap(), spec);
    }
}
