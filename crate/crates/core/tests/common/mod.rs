#![allow(dead_code)]

use std::path::PathBuf;

use assertgen::sva::*;
use proptest::prelude::*;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(rel: &str) -> PathBuf {
    repo_root().join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// The six paper-derived listings as individual block texts.
pub fn listing_blocks() -> Vec<String> {
    read_fixture("paper_listings.sva")
        .split("\n\n")
        .map(|b| b.trim_end().to_owned())
        .filter(|b| !b.is_empty())
        .collect()
}

/// One systematic corruption of a listing plus the line range where a
/// diagnostic must land: from the line of the last code character before the
/// edit to the line of the first code character after it.
pub struct Mutant {
    pub kind: &'static str,
    pub text: String,
    pub lines: (usize, usize),
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].matches('\n').count() + 1
}

fn region(text: &str, at: usize) -> (usize, usize) {
    let before = text[..at]
        .char_indices()
        .rev()
        .find(|(_, c)| !c.is_whitespace())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let after = text[at..]
        .char_indices()
        .find(|(_, c)| !c.is_whitespace())
        .map(|(i, _)| at + i)
        .unwrap_or(text.len());
    (line_of(text, before), line_of(text, after))
}

fn delete(text: &str, at: usize, len: usize, kind: &'static str) -> Mutant {
    let mutated = format!("{}{}", &text[..at], &text[at + len..]);
    let lines = region(&mutated, at);
    Mutant { kind, text: mutated, lines }
}

pub fn mutants(listing: &str) -> Vec<Mutant> {
    let mut out = Vec::new();
    let header = listing.find("property ").expect("property keyword");
    let header_semi = header + listing[header..].find(';').expect("header semicolon");
    out.push(delete(listing, header_semi, 1, "semicolon deletion (header)"));
    let last_semi = listing.rfind(';').expect("final semicolon");
    out.push(delete(listing, last_semi, 1, "semicolon deletion (assert)"));
    let (end_at, end_len) = match listing.rfind("endproperty") {
        Some(i) => (i, "endproperty".len()),
        None => (listing.rfind("end property").expect("end property"), "end property".len()),
    };
    out.push(delete(listing, end_at, end_len, "endproperty deletion"));
    let (imp_at, imp_len) = ["|->", "|=>", "->"]
        .iter()
        .filter_map(|op| listing.find(op).map(|i| (i, op.len())))
        .min()
        .expect("implication operator");
    let text = format!("{}|>{}", &listing[..imp_at], &listing[imp_at + imp_len..]);
    let line = line_of(&text, imp_at);
    out.push(Mutant {
        kind: "implication corrupted to '|>'",
        text,
        lines: (line, line),
    });
    out
}

// Random ASTs within the grammar.

pub fn ident_name() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec!["clk_i", "rst_ni", "tick_count", "active", "A", "B", "S", "C4", "x"])
            .prop_map(str::to_owned),
        "[a-z_][a-z0-9_]{0,5}".prop_filter("reserved", |s| {
            !matches!(
                s.as_str(),
                "property" | "endproperty" | "end" | "assert" | "posedge" | "negedge"
            ) && !["sequence", "throughout", "within", "intersect", "until", "implies", "iff",
                "disable", "not", "and", "or", "always", "if", "else", "cover", "assume",
                "endsequence", "first_match", "s_until", "until_with", "eventually",
                "s_eventually", "nexttime"]
                .contains(&s.as_str())
        }),
    ]
}

pub fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        any::<u32>().prop_map(|v| Literal::plain(v as u64)),
        (1u32..=64, any::<u64>(), 0usize..4).prop_map(|(w, v, b)| {
            let base = [LiteralBase::Binary, LiteralBase::Octal, LiteralBase::Decimal, LiteralBase::Hex][b];
            let value = if w >= 64 { v } else { v & ((1u64 << w) - 1) };
            Literal { width: Some(w), base, value }
        }),
        (any::<u16>(), 0usize..4).prop_map(|(v, b)| {
            let base = [LiteralBase::Binary, LiteralBase::Octal, LiteralBase::Decimal, LiteralBase::Hex][b];
            Literal { width: None, base, value: v as u64 }
        }),
    ]
}

pub fn leaf() -> impl Strategy<Value = PropExpr> {
    prop_oneof![
        (ident_name(), prop::option::of((0u64..64, prop::option::of(0u64..64)))).prop_map(
            |(name, idx)| PropExpr::Ident {
                name,
                index: idx.map(|(a, b)| match b {
                    Some(b) => Index { high: a.max(b), low: Some(a.min(b)) },
                    None => Index { high: a, low: None },
                }),
            }
        ),
        literal().prop_map(PropExpr::Literal),
    ]
}

pub fn expr() -> impl Strategy<Value = PropExpr> {
    leaf().prop_recursive(6, 48, 3, |inner| {
        prop_oneof![
            (prop::sample::select(BinaryOp::ALL.to_vec()), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| PropExpr::binary(op, l, r)),
            (
                prop::sample::select(vec![UnaryOp::Not, UnaryOp::BitNot, UnaryOp::Neg]),
                inner.clone()
            )
                .prop_map(|(op, e)| PropExpr::unary(op, e)),
            (inner.clone(), prop::option::of(1u32..8)).prop_map(|(e, d)| PropExpr::past(e, d)),
            (
                prop::sample::select(vec![
                    ImplicationKind::Overlapping,
                    ImplicationKind::NonOverlapping,
                    ImplicationKind::Boolean
                ]),
                inner.clone(),
                inner
            )
                .prop_map(|(k, a, c)| PropExpr::implies(k, a, c)),
        ]
    })
}

prop_compose! {
    pub fn property()(
        name in ident_name(),
        clock in prop::option::of((any::<bool>(), ident_name())),
        body in expr(),
    ) -> PropertyAst {
        PropertyAst {
            name,
            clocking: clock.map(|(pos, signal)| Clocking {
                edge: if pos { Edge::Posedge } else { Edge::Negedge },
                signal,
            }),
            body,
        }
    }
}
