use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::ast::PropertyAst;
use super::diagnostic::{SyntaxDiagnostic, MAX_DIAGNOSTICS};
use super::lexer::{tokenize, Keyword, TokenKind};
use super::parser::parse_assertion;
use super::render::render;

/// Where an assertion came from in the generate/repair loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    InitialGeneration,
    Repair(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub name: String,
    pub source_text: String,
    pub comment: Option<String>,
    /// Present iff `source_text` parsed.
    pub ast: Option<PropertyAst>,
    pub origin: Origin,
}

impl Assertion {
    /// Builds an assertion from raw block text. The name comes from the parsed
    /// property, falling back to the declared name token, then to `fallback_name`.
    pub fn from_source(source_text: &str, origin: Origin, fallback_name: &str) -> Assertion {
        let ast = parse_assertion(source_text).ok();
        let name = ast
            .as_ref()
            .map(|a| a.name.clone())
            .or_else(|| declared_name(source_text))
            .unwrap_or_else(|| fallback_name.to_owned());
        Assertion {
            name,
            source_text: source_text.to_owned(),
            comment: leading_comment(source_text),
            ast,
            origin,
        }
    }

    pub fn diagnostics(&self) -> Vec<SyntaxDiagnostic> {
        match parse_assertion(&self.source_text) {
            Ok(_) => Vec::new(),
            Err(d) => d,
        }
    }

    pub fn signals(&self) -> BTreeSet<String> {
        self.ast.as_ref().map(PropertyAst::signals).unwrap_or_default()
    }

    /// Block text for `.sva` output: the comment line, then the canonical
    /// rendering when parsed, otherwise the source with blank lines dropped.
    pub fn to_block(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.comment {
            out.push_str("// ");
            out.push_str(c);
            out.push('\n');
        }
        match &self.ast {
            Some(ast) => out.push_str(&render(ast)),
            None => {
                let body: Vec<&str> = self
                    .source_text
                    .lines()
                    .skip_while(|l| l.trim_start().starts_with("//") || l.trim().is_empty())
                    .filter(|l| !l.trim().is_empty())
                    .collect();
                out.push_str(&body.join("\n"));
            }
        }
        out
    }
}

/// The name token following the first `property` keyword that is not part of
/// an `assert property` statement.
fn declared_name(source: &str) -> Option<String> {
    let toks = tokenize(source);
    toks.windows(2).enumerate().find_map(|(i, w)| {
        let after_assert = i > 0 && toks[i - 1].kind == TokenKind::Keyword(Keyword::Assert);
        match (&w[0].kind, &w[1].kind) {
            (TokenKind::Keyword(Keyword::Property), TokenKind::Ident(n)) if !after_assert => {
                Some(n.clone())
            }
            _ => None,
        }
    })
}

fn declared_name_pos(source: &str) -> Option<(usize, usize)> {
    let toks = tokenize(source);
    toks.windows(2).enumerate().find_map(|(i, w)| {
        let after_assert = i > 0 && toks[i - 1].kind == TokenKind::Keyword(Keyword::Assert);
        match (&w[0].kind, &w[1].kind) {
            (TokenKind::Keyword(Keyword::Property), TokenKind::Ident(_)) if !after_assert => {
                Some((w[1].start.line, w[1].start.col))
            }
            _ => None,
        }
    })
}

fn leading_comment(source: &str) -> Option<String> {
    let first = source.lines().find(|l| !l.trim().is_empty())?;
    let text = first.trim_start().strip_prefix("//")?.trim();
    (!text.is_empty()).then(|| text.to_owned())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssertionSuite {
    pub design_name: String,
    pub assertions: Vec<Assertion>,
}

impl AssertionSuite {
    pub fn new(design_name: impl Into<String>) -> Self {
        AssertionSuite {
            design_name: design_name.into(),
            assertions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.assertions.iter().map(|a| a.name.as_str()).collect()
    }

    /// `.sva` rendering: one block per assertion, separated by blank lines.
    pub fn to_sva(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.assertions.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&a.to_block());
            out.push('\n');
        }
        out
    }
}

/// Blank-line separated blocks of `.sva` text that contain code, with the
/// 1-based line each starts on. Comment-only blocks are skipped.
pub fn sva_blocks(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    let mut start = 1;
    let mut flush = |block: &mut Vec<&str>, start: usize| {
        let has_code = block
            .iter()
            .any(|l| !l.trim().is_empty() && !l.trim_start().starts_with("//"));
        if has_code {
            out.push((start, block.join("\n")));
        }
        block.clear();
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut block, start);
        } else {
            if block.is_empty() {
                start = i + 1;
            }
            block.push(line);
        }
    }
    flush(&mut block, start);
    out
}

/// Splits `.sva` text into assertions at blank lines.
pub fn parse_sva_file(text: &str, design_name: &str) -> AssertionSuite {
    let mut suite = AssertionSuite::new(design_name);
    for (_, source) in sva_blocks(text) {
        let fallback = format!("block_{}", suite.len() + 1);
        suite
            .assertions
            .push(Assertion::from_source(&source, Origin::InitialGeneration, &fallback));
    }
    suite
}

/// The local syntax gate: parse every assertion and flag duplicate names.
/// Only assertions with at least one diagnostic are returned, in suite order.
pub fn validate_suite(suite: &AssertionSuite) -> Vec<(String, Vec<SyntaxDiagnostic>)> {
    suite_diagnostics(suite)
        .into_iter()
        .zip(&suite.assertions)
        .filter(|(d, _)| !d.is_empty())
        .map(|(d, a)| (a.name.clone(), d))
        .collect()
}

/// Diagnostics for every assertion, in suite order, empty for clean ones.
pub fn suite_diagnostics(suite: &AssertionSuite) -> Vec<Vec<SyntaxDiagnostic>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in &suite.assertions {
        let mut diags = a.diagnostics();
        if !seen.insert(a.name.as_str()) {
            let (line, column) = declared_name_pos(&a.source_text).unwrap_or((1, 1));
            diags.push(SyntaxDiagnostic {
                line,
                column,
                message: format!("duplicate property name '{}'", a.name),
                found: a.name.clone(),
                expected: vec!["unique property name".to_owned()],
            });
            diags.sort_by_key(|d| (d.line, d.column));
            diags.truncate(MAX_DIAGNOSTICS);
        }
        out.push(diags);
    }
    out
}
