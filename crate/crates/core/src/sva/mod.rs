//! Lexing, parsing, validation and canonical rendering for the supported
//! SystemVerilog assertion subset.

mod ast;
mod diagnostic;
mod lexer;
mod parser;
mod render;
mod suite;

pub use ast::{
    BinaryOp, Clocking, Edge, ImplicationKind, Index, Literal, LiteralBase, PropExpr,
    PropertyAst, UnaryOp,
};
pub use diagnostic::{SyntaxDiagnostic, MAX_DIAGNOSTICS};
pub use lexer::{tokenize, Keyword, Pos, Token, TokenKind};
pub use parser::parse_assertion;
pub use render::{render, render_expr};
pub use suite::{parse_sva_file, suite_diagnostics, sva_blocks, validate_suite, Assertion, AssertionSuite, Origin};


/// Every distinct signal referenced by `ast`, including the clock.
pub fn extract_signals(ast: &PropertyAst) -> std::collections::BTreeSet<String> {
    ast.signals()
}
