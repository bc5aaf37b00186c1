use std::fmt;

use thiserror::Error;

use crate::sva::{tokenize, Assertion, AssertionSuite, Keyword, Origin, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionFailure {
    #[error("no code fence found")]
    NoCodeFence,
    #[error("{}", describe_fragments(.fragments))]
    Unsplittable { fragments: Vec<String> },
}

fn describe_fragments(fragments: &[String]) -> String {
    let mut out = format!(
        "{} fenced fragment{} could not be split into property/assert blocks",
        fragments.len(),
        if fragments.len() == 1 { "" } else { "s" }
    );
    for f in fragments {
        let first = f.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
        out.push_str(&format!("; near '{}'", Short(first)));
    }
    out
}

struct Short<'a>(&'a str);

impl fmt::Display for Short<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.chars().take(60).collect();
        f.write_str(&s)?;
        if self.0.chars().count() > 60 {
            f.write_str("...")?;
        }
        Ok(())
    }
}

/// Byte ranges of fenced block bodies. An unclosed fence runs to the end.
fn fences(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let is_fence = line.trim_start().starts_with("```");
        match (is_fence, open) {
            (true, None) => open = Some(offset + line.len()),
            (true, Some(start)) => {
                out.push((start, offset));
                open = None;
            }
            _ => {}
        }
        offset += line.len();
    }
    if let Some(start) = open {
        out.push((start, text.len()));
    }
    out
}

fn line_start(text: &str, at: usize) -> usize {
    text[..at].rfind('\n').map_or(0, |i| i + 1)
}

fn line_end(text: &str, at: usize) -> usize {
    text[at..].find('\n').map_or(text.len(), |i| at + i)
}

/// Extends `start` (a line start) backwards over directly preceding `//` lines.
fn absorb_comments(text: &str, mut start: usize, floor: usize) -> usize {
    while start > floor {
        let prev = line_start(text, start - 1);
        let line = &text[prev..start - 1];
        if line.trim_start().starts_with("//") {
            start = prev;
        } else {
            break;
        }
    }
    start
}

fn only_comments(s: &str) -> bool {
    s.lines()
        .all(|l| l.trim().is_empty() || l.trim_start().starts_with("//"))
}

/// Splits one fence body into block byte ranges (relative to `body`), or
/// returns the fragments that are not part of any block.
fn split_fence(body: &str) -> Result<Vec<(usize, usize)>, Vec<String>> {
    let toks = tokenize(body);
    // Property declarations: `property` not preceded by `assert` or `end`.
    let decls: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            t.kind == TokenKind::Keyword(Keyword::Property)
                && !(*i > 0
                    && matches!(
                        toks[i - 1].kind,
                        TokenKind::Keyword(Keyword::Assert) | TokenKind::Keyword(Keyword::End)
                    ))
        })
        .map(|(i, _)| i)
        .collect();
    if decls.is_empty() {
        return if only_comments(body) { Ok(vec![]) } else { Err(vec![body.trim().to_owned()]) };
    }

    let mut stray = Vec::new();
    let mut blocks = Vec::new();
    let mut floor = 0;
    for (k, &d) in decls.iter().enumerate() {
        let next = decls.get(k + 1).copied().unwrap_or(toks.len() - 1);
        let start = absorb_comments(body, line_start(body, toks[d].start.offset), floor);
        if !only_comments(&body[floor..start]) {
            stray.push(body[floor..start].trim().to_owned());
        }
        // The block ends with the line holding the `;` of the first assert
        // statement after the property's end marker, or just before the next
        // declaration when that statement is incomplete.
        let mut seen_end = false;
        let mut seen_assert = false;
        let mut cut = None;
        for t in &toks[d + 1..next] {
            match &t.kind {
                TokenKind::Keyword(Keyword::EndProperty) | TokenKind::Keyword(Keyword::End) => seen_end = true,
                TokenKind::Keyword(Keyword::Assert) if seen_end => seen_assert = true,
                TokenKind::Semi if seen_assert => {
                    cut = Some(line_end(body, t.end.offset));
                    break;
                }
                _ => {}
            }
        }
        let next_start = if k + 1 < decls.len() {
            absorb_comments(body, line_start(body, toks[next].start.offset), 0)
        } else {
            body.len()
        };
        let end = cut.unwrap_or(next_start).min(next_start).max(start);
        let trimmed_end = start + body[start..end].trim_end().len();
        blocks.push((start, trimmed_end));
        floor = end;
    }
    if !only_comments(&body[floor..]) {
        stray.push(body[floor..].trim().to_owned());
    }
    if stray.is_empty() {
        Ok(blocks)
    } else {
        Err(stray)
    }
}

/// Collects fenced code blocks from a response and splits them into
/// assertions. Every assertion's `source_text` is a substring of `response`.
pub fn extract_assertions(response: &str, design_name: &str, origin: Origin) -> Result<AssertionSuite, ExtractionFailure> {
    let fenced = fences(response);
    if fenced.is_empty() {
        return Err(ExtractionFailure::NoCodeFence);
    }
    let mut suite = AssertionSuite::new(design_name);
    let mut fragments = Vec::new();
    for (fs, fe) in fenced {
        let body = &response[fs..fe];
        match split_fence(body) {
            Ok(blocks) => {
                for (s, e) in blocks {
                    let fallback = format!("assertion_{}", suite.len() + 1);
                    suite
                        .assertions
                        .push(Assertion::from_source(&body[s..e], origin, &fallback));
                }
            }
            Err(mut f) => fragments.append(&mut f),
        }
    }
    if !fragments.is_empty() {
        return Err(ExtractionFailure::Unsplittable { fragments });
    }
    if suite.is_empty() {
        return Err(ExtractionFailure::Unsplittable {
            fragments: vec![String::new()],
        });
    }
    Ok(suite)
}
