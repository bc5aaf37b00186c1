//! Recursive-descent parser for a single `property ... endproperty` block
//! followed by its `assert property (name);` statement.
//!
//! Precedence, loosest first: implications (`|->`, `|=>`, `->`, right
//! associative) < `||` < `&&` < `|` < `^` < `&` < equality < relational <
//! additive < unary < primary.

use super::ast::*;
use super::diagnostic::{SyntaxDiagnostic, MAX_DIAGNOSTICS};
use super::lexer::{tokenize, Keyword, Pos, Token, TokenKind, UNSUPPORTED_WORDS};

type PResult<T> = Result<T, SyntaxDiagnostic>;

/// Parses one assertion block. Errors are returned as positioned diagnostics,
/// ordered by position and capped at [`MAX_DIAGNOSTICS`].
pub fn parse_assertion(source: &str) -> Result<PropertyAst, Vec<SyntaxDiagnostic>> {
    let mut parser = Parser {
        tokens: tokenize(source),
        pos: 0,
        diags: Vec::new(),
    };
    let ast = parser.assertion();
    if parser.diags.is_empty() {
        if let Some(ast) = ast {
            return Ok(ast);
        }
    }
    let mut diags = parser.diags;
    diags.sort_by_key(|d| (d.line, d.column));
    diags.dedup();
    diags.truncate(MAX_DIAGNOSTICS);
    Err(diags)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<SyntaxDiagnostic>,
}

fn quoted(s: &str) -> String {
    format!("'{s}'")
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn nth_kind(&self, n: usize) -> &TokenKind {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn prev_end(&self) -> Pos {
        if self.pos == 0 {
            self.tokens[0].start
        } else {
            self.tokens[self.pos - 1].end
        }
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == kind
    }

    fn at_keyword(&self, kw: Keyword) -> bool {
        self.at(&TokenKind::Keyword(kw))
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> SyntaxDiagnostic {
        let tok = self.peek();
        SyntaxDiagnostic::new(tok.start, message, tok.kind.to_string(), expected)
    }

    /// Positioned right after the previous token, for a missing terminator.
    fn error_after_prev(&self, message: impl Into<String>, expected: &[&str]) -> SyntaxDiagnostic {
        SyntaxDiagnostic::new(
            self.prev_end(),
            message,
            self.peek().kind.to_string(),
            expected,
        )
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxDiagnostic {
        match self.peek_kind() {
            TokenKind::Unsupported(op) => {
                self.error_here(format!("unsupported construct '{op}'"), expected)
            }
            TokenKind::Ident(w) if UNSUPPORTED_WORDS.contains(&w.as_str()) => {
                self.error_here(format!("unsupported construct '{w}'"), expected)
            }
            TokenKind::Unknown(c) => self.error_here(format!("unrecognized character '{c}'"), expected),
            TokenKind::Eof => self.error_here("unexpected end of input", expected),
            _ => self.error_here("unexpected token", expected),
        }
    }

    fn expect_terminator(&mut self, kind: TokenKind, context: &str) -> PResult<()> {
        if self.at(&kind) {
            self.bump();
            Ok(())
        } else {
            let sym = kind.to_string();
            Err(self.error_after_prev(format!("missing '{sym}' {context}"), &[&quoted(&sym)]))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<String> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) if !UNSUPPORTED_WORDS.contains(&name.as_str()) => {
                self.bump();
                Ok(name)
            }
            TokenKind::Ident(_) | TokenKind::Unsupported(_) | TokenKind::Unknown(_) => {
                Err(self.unexpected(&[what]))
            }
            _ => Err(self.error_here(format!("missing {what}"), &[what])),
        }
    }

    fn at_property_end(&self) -> bool {
        self.at_keyword(Keyword::EndProperty)
            || (self.at_keyword(Keyword::End)
                && self.nth_kind(1) == &TokenKind::Keyword(Keyword::Property))
    }

    fn skip_to_property_end(&mut self) {
        while !self.at_property_end()
            && !self.at_keyword(Keyword::Assert)
            && !self.at(&TokenKind::Eof)
        {
            self.bump();
        }
    }

    fn record(&mut self, diag: SyntaxDiagnostic) {
        self.diags.push(diag);
    }

    fn assertion(&mut self) -> Option<PropertyAst> {
        if !self.at_keyword(Keyword::Property) {
            let d = self.unexpected(&["'property'"]);
            self.record(d);
            return None;
        }
        self.bump();
        let name = match self.expect_ident("property name") {
            Ok(n) => Some(n),
            Err(d) => {
                self.record(d);
                None
            }
        };
        if let Err(d) = self.expect_terminator(TokenKind::Semi, "after property name") {
            self.record(d);
        }

        let clocking = if self.at(&TokenKind::At) {
            match self.clocking() {
                Ok(c) => Some(c),
                Err(d) => {
                    self.record(d);
                    self.skip_to_property_end();
                    None
                }
            }
        } else {
            None
        };

        let body = if self.at_property_end() {
            let d = self.error_here("property body missing", &["expression"]);
            self.record(d);
            None
        } else if self.at_keyword(Keyword::Assert) || self.at(&TokenKind::Eof) {
            // body already consumed by recovery or truly absent
            if self.diags.is_empty() {
                let d = self.error_here("property body missing", &["expression"]);
                self.record(d);
            }
            None
        } else {
            match self.implication() {
                Ok(e) => Some(e),
                Err(d) => {
                    self.record(d);
                    self.skip_to_property_end();
                    None
                }
            }
        };

        if body.is_some() && self.at(&TokenKind::Semi) {
            self.bump();
        }

        if self.at_keyword(Keyword::EndProperty) {
            self.bump();
        } else if self.at_keyword(Keyword::End) {
            self.bump();
            if self.at_keyword(Keyword::Property) {
                self.bump();
            } else {
                let d = self.error_here("expected 'property' after 'end'", &["'property'"]);
                self.record(d);
            }
        } else if self.at_keyword(Keyword::Assert) || self.at(&TokenKind::Eof) {
            let d = self.error_here(
                "unterminated property: missing 'endproperty'",
                &["'endproperty'"],
            );
            self.record(d);
        } else if body.is_some() {
            let d = self.unexpected(&["';'", "'endproperty'"]);
            self.record(d);
            self.skip_to_property_end();
            if self.at_property_end() {
                if self.at_keyword(Keyword::End) {
                    self.bump();
                }
                self.bump();
            }
        }

        let asserted = match self.assert_stmt() {
            Ok(n) => Some(n),
            Err(d) => {
                self.record(d);
                None
            }
        };

        if let (Some(declared), Some((asserted, at))) = (&name, &asserted) {
            if declared != asserted {
                self.record(SyntaxDiagnostic::new(
                    *at,
                    format!("assert names property '{asserted}' but the declared property is '{declared}'"),
                    asserted.clone(),
                    &[&quoted(declared)],
                ));
            }
        }

        if asserted.is_some() && !self.at(&TokenKind::Eof) {
            let d = self.error_here("unexpected token after assert statement", &["end of input"]);
            self.record(d);
        }

        Some(PropertyAst {
            name: name?,
            clocking,
            body: body?,
        })
    }

    fn clocking(&mut self) -> PResult<Clocking> {
        self.bump(); // @
        if !self.at(&TokenKind::LParen) {
            return Err(self.unexpected(&["'('"]));
        }
        self.bump();
        let edge = match self.peek_kind() {
            TokenKind::Keyword(Keyword::Posedge) => Edge::Posedge,
            TokenKind::Keyword(Keyword::Negedge) => Edge::Negedge,
            _ => return Err(self.unexpected(&["'posedge'", "'negedge'"])),
        };
        self.bump();
        let signal = self.expect_ident("clock signal")?;
        self.expect_terminator(TokenKind::RParen, "after clocking event")?;
        Ok(Clocking { edge, signal })
    }

    fn assert_stmt(&mut self) -> PResult<(String, Pos)> {
        if !self.at_keyword(Keyword::Assert) {
            return Err(self.unexpected(&["'assert'"]));
        }
        self.bump();
        if !self.at_keyword(Keyword::Property) {
            return Err(self.unexpected(&["'property'"]));
        }
        self.bump();
        self.expect_terminator(TokenKind::LParen, "after 'assert property'")?;
        let at = self.peek().start;
        let name = self.expect_ident("property name")?;
        self.expect_terminator(TokenKind::RParen, "after asserted property name")?;
        self.expect_terminator(TokenKind::Semi, "after assert statement")?;
        Ok((name, at))
    }

    fn implication(&mut self) -> PResult<PropExpr> {
        let lhs = self.binary(1)?;
        let kind = match self.peek_kind() {
            TokenKind::OverlapImpl => ImplicationKind::Overlapping,
            TokenKind::NonOverlapImpl => ImplicationKind::NonOverlapping,
            TokenKind::Arrow => ImplicationKind::Boolean,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.implication()?;
        Ok(PropExpr::implies(kind, lhs, rhs))
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek_kind() {
            TokenKind::OrOr => BinaryOp::LogicalOr,
            TokenKind::AndAnd => BinaryOp::LogicalAnd,
            TokenKind::Pipe => BinaryOp::BitOr,
            TokenKind::Caret => BinaryOp::BitXor,
            TokenKind::Amp => BinaryOp::BitAnd,
            TokenKind::EqEq => BinaryOp::Eq,
            TokenKind::NotEq => BinaryOp::Ne,
            TokenKind::Lt => BinaryOp::Lt,
            TokenKind::Le => BinaryOp::Le,
            TokenKind::Gt => BinaryOp::Gt,
            TokenKind::Ge => BinaryOp::Ge,
            TokenKind::Plus => BinaryOp::Add,
            TokenKind::Minus => BinaryOp::Sub,
            _ => return None,
        })
    }

    /// Left-associative binary levels from `min_prec` upward.
    fn binary(&mut self, min_prec: u8) -> PResult<PropExpr> {
        if min_prec > 8 {
            return self.unary();
        }
        let mut lhs = self.binary(min_prec + 1)?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() == min_prec) {
            self.bump();
            let rhs = self.binary(min_prec + 1)?;
            lhs = PropExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<PropExpr> {
        let op = match self.peek_kind() {
            TokenKind::Bang => UnaryOp::Not,
            TokenKind::Tilde => UnaryOp::BitNot,
            TokenKind::Minus => UnaryOp::Neg,
            _ => return self.primary(),
        };
        self.bump();
        Ok(PropExpr::unary(op, self.unary()?))
    }

    fn primary(&mut self) -> PResult<PropExpr> {
        match self.peek_kind().clone() {
            TokenKind::LParen => {
                self.bump();
                let inner = self.implication()?;
                self.expect_terminator(TokenKind::RParen, "to close parenthesized expression")?;
                Ok(inner)
            }
            TokenKind::SystemIdent(name) if name == "$past" => {
                self.bump();
                self.expect_terminator(TokenKind::LParen, "after '$past'")?;
                let expr = self.implication()?;
                let depth = if self.at(&TokenKind::Comma) {
                    self.bump();
                    Some(self.past_depth()?)
                } else {
                    None
                };
                self.expect_terminator(TokenKind::RParen, "to close '$past'")?;
                Ok(PropExpr::past(expr, depth))
            }
            TokenKind::SystemIdent(name) => {
                Err(self.error_here(format!("unsupported system function '{name}'"), &["'$past'"]))
            }
            TokenKind::Ident(name) if !UNSUPPORTED_WORDS.contains(&name.as_str()) => {
                self.bump();
                let index = if self.at(&TokenKind::LBracket) {
                    Some(self.index()?)
                } else {
                    None
                };
                Ok(PropExpr::Ident { name, index })
            }
            TokenKind::Number(text) => {
                let start = self.peek().start;
                let lit = parse_literal(&text)
                    .map_err(|msg| SyntaxDiagnostic::new(start, msg, text.clone(), &["literal"]))?;
                self.bump();
                Ok(PropExpr::Literal(lit))
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    fn past_depth(&mut self) -> PResult<u32> {
        let tok = self.peek().clone();
        let TokenKind::Number(text) = &tok.kind else {
            return Err(self.unexpected(&["positive integer"]));
        };
        match plain_integer(text).and_then(|v| u32::try_from(v).ok()) {
            Some(d) if d > 0 => {
                self.bump();
                Ok(d)
            }
            _ => Err(SyntaxDiagnostic::new(
                tok.start,
                "malformed literal: '$past' depth must be a positive integer",
                text.clone(),
                &["positive integer"],
            )),
        }
    }

    fn index_bound(&mut self) -> PResult<u64> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number(text) => match plain_integer(text) {
                Some(v) => {
                    self.bump();
                    Ok(v)
                }
                None => Err(SyntaxDiagnostic::new(
                    tok.start,
                    "malformed slice: index must be a plain integer",
                    text.clone(),
                    &["integer"],
                )),
            },
            _ => Err(SyntaxDiagnostic::new(
                tok.start,
                "malformed slice: index must be a plain integer",
                tok.kind.to_string(),
                &["integer"],
            )),
        }
    }

    fn index(&mut self) -> PResult<Index> {
        let open = self.bump().start;
        let high = self.index_bound()?;
        let low = if self.at(&TokenKind::Colon) {
            self.bump();
            Some(self.index_bound()?)
        } else {
            None
        };
        if !self.at(&TokenKind::RBracket) {
            return Err(self.error_after_prev("malformed slice: missing ']'", &["']'"]));
        }
        self.bump();
        if let Some(low) = low {
            if high < low {
                return Err(SyntaxDiagnostic::new(
                    open,
                    format!("malformed slice: high index {high} is below low index {low}"),
                    format!("[{high}:{low}]"),
                    &["[high:low] with high >= low"],
                ));
            }
        }
        Ok(Index { high, low })
    }
}

fn plain_integer(text: &str) -> Option<u64> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit() || b == b'_') {
        return None;
    }
    let digits: String = text.chars().filter(|c| *c != '_').collect();
    digits.parse().ok()
}

/// Validates raw literal text such as `12'h0`, `'b101` or `42`.
pub(crate) fn parse_literal(text: &str) -> Result<Literal, String> {
    let Some(tick) = text.find('\'') else {
        return plain_integer(text)
            .map(Literal::plain)
            .ok_or_else(|| "malformed literal: value does not fit in 64 bits".to_owned());
    };
    let (width_text, rest) = text.split_at(tick);
    let width = if width_text.is_empty() {
        None
    } else {
        match plain_integer(width_text).and_then(|w| u32::try_from(w).ok()) {
            Some(0) | None => return Err("malformed literal: width must be a positive integer".into()),
            Some(w) => Some(w),
        }
    };
    let mut chars = rest[1..].chars();
    let mut base_char = chars.next();
    if matches!(base_char, Some('s' | 'S')) {
        return Err("malformed literal: signed literals are not supported".into());
    }
    let base = match base_char.take().map(|c| c.to_ascii_lowercase()) {
        Some('b') => LiteralBase::Binary,
        Some('o') => LiteralBase::Octal,
        Some('d') => LiteralBase::Decimal,
        Some('h') => LiteralBase::Hex,
        _ => return Err("malformed literal: missing base".into()),
    };
    let digits: String = chars.filter(|c| *c != '_').collect();
    if digits.is_empty() {
        return Err("malformed literal: missing digits".into());
    }
    if digits.chars().any(|c| matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?')) {
        return Err("malformed literal: x/z digits are not supported".into());
    }
    let value = u64::from_str_radix(&digits, base.radix()).map_err(|_| {
        if digits.chars().all(|c| c.is_digit(base.radix())) {
            "malformed literal: value does not fit in 64 bits".to_owned()
        } else {
            format!("malformed literal: invalid digit for base {}", base.radix())
        }
    })?;
    let lit = Literal { width, base, value };
    if !lit.fits_width() {
        return Err(format!(
            "malformed literal: value {value} does not fit in {} bits",
            width.unwrap_or(0)
        ));
    }
    Ok(lit)
}
