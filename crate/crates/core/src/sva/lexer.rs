//! Tokenizer for the assertion subset. Never fails: unrecognized input becomes
//! [`TokenKind::Unknown`] and the parser reports it.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub col: usize,
    /// Byte offset into the source.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Property,
    EndProperty,
    End,
    Assert,
    Posedge,
    Negedge,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Keyword> {
        Some(match word {
            "property" => Keyword::Property,
            "endproperty" => Keyword::EndProperty,
            "end" => Keyword::End,
            "assert" => Keyword::Assert,
            "posedge" => Keyword::Posedge,
            "negedge" => Keyword::Negedge,
            _ => return None,
        })
    }
}

/// Words that belong to SVA constructs outside the supported grammar.
pub const UNSUPPORTED_WORDS: &[&str] = &[
    "sequence",
    "endsequence",
    "throughout",
    "within",
    "intersect",
    "first_match",
    "until",
    "s_until",
    "until_with",
    "implies",
    "iff",
    "disable",
    "not",
    "and",
    "or",
    "eventually",
    "s_eventually",
    "always",
    "nexttime",
    "if",
    "else",
    "cover",
    "assume",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    /// `$past`, `$rose`, ...
    SystemIdent(String),
    /// Raw literal text, validated by the parser.
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    At,
    OverlapImpl,
    NonOverlapImpl,
    Arrow,
    OrOr,
    AndAnd,
    Pipe,
    Caret,
    Amp,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Bang,
    Tilde,
    /// Recognized but unsupported operator such as `##` or `===`.
    Unsupported(String),
    Unknown(String),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(s)
            | TokenKind::SystemIdent(s)
            | TokenKind::Number(s)
            | TokenKind::Unsupported(s)
            | TokenKind::Unknown(s) => s.as_str(),
            TokenKind::Keyword(k) => match k {
                Keyword::Property => "property",
                Keyword::EndProperty => "endproperty",
                Keyword::End => "end",
                Keyword::Assert => "assert",
                Keyword::Posedge => "posedge",
                Keyword::Negedge => "negedge",
            },
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Colon => ":",
            TokenKind::Semi => ";",
            TokenKind::Comma => ",",
            TokenKind::At => "@",
            TokenKind::OverlapImpl => "|->",
            TokenKind::NonOverlapImpl => "|=>",
            TokenKind::Arrow => "->",
            TokenKind::OrOr => "||",
            TokenKind::AndAnd => "&&",
            TokenKind::Pipe => "|",
            TokenKind::Caret => "^",
            TokenKind::Amp => "&",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Bang => "!",
            TokenKind::Tilde => "~",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: Pos,
    /// Position just past the last character of the token.
    pub end: Pos,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
            offset: self.offset,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.src[self.offset..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.offset..].starts_with(s)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

// Longest first so `|->` wins over `|` and `===` over `==`.
const PUNCT: &[(&str, Option<TokenKind>)] = &[
    ("|->", Some(TokenKind::OverlapImpl)),
    ("|=>", Some(TokenKind::NonOverlapImpl)),
    ("===", None),
    ("!==", None),
    ("##", None),
    ("->", Some(TokenKind::Arrow)),
    ("||", Some(TokenKind::OrOr)),
    ("&&", Some(TokenKind::AndAnd)),
    ("==", Some(TokenKind::EqEq)),
    ("!=", Some(TokenKind::NotEq)),
    ("<=", Some(TokenKind::Le)),
    (">=", Some(TokenKind::Ge)),
    ("<<", None),
    (">>", None),
    ("~^", None),
    ("^~", None),
    ("(", Some(TokenKind::LParen)),
    (")", Some(TokenKind::RParen)),
    ("[", Some(TokenKind::LBracket)),
    ("]", Some(TokenKind::RBracket)),
    (":", Some(TokenKind::Colon)),
    (";", Some(TokenKind::Semi)),
    (",", Some(TokenKind::Comma)),
    ("@", Some(TokenKind::At)),
    ("|", Some(TokenKind::Pipe)),
    ("^", Some(TokenKind::Caret)),
    ("&", Some(TokenKind::Amp)),
    ("<", Some(TokenKind::Lt)),
    (">", Some(TokenKind::Gt)),
    ("+", Some(TokenKind::Plus)),
    ("-", Some(TokenKind::Minus)),
    ("!", Some(TokenKind::Bang)),
    ("~", Some(TokenKind::Tilde)),
    ("*", None),
    ("/", None),
    ("%", None),
    ("?", None),
    ("=", None),
];

/// Tokenizes `src`, skipping whitespace and `//` / `/* */` comments.
/// The returned vector always ends with an [`TokenKind::Eof`] token.
pub fn tokenize(src: &str) -> Vec<Token> {
    let mut cur = Cursor {
        src,
        offset: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    loop {
        // trivia
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.starts_with("//") => cur.eat_while(|c| c != '\n'),
                Some('/') if cur.starts_with("/*") => {
                    cur.bump();
                    cur.bump();
                    while cur.peek().is_some() && !cur.starts_with("*/") {
                        cur.bump();
                    }
                    cur.bump();
                    cur.bump();
                }
                _ => break,
            }
        }
        let start = cur.pos();
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                start,
                end: start,
            });
            return tokens;
        };
        let kind = if is_ident_start(c) {
            cur.eat_while(is_ident_char);
            let word = &src[start.offset..cur.offset];
            match Keyword::lookup(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_owned()),
            }
        } else if c == '$' && cur.peek_nth(1).is_some_and(is_ident_start) {
            cur.bump();
            cur.eat_while(is_ident_char);
            TokenKind::SystemIdent(src[start.offset..cur.offset].to_owned())
        } else if c.is_ascii_digit() || (c == '\'' && cur.peek_nth(1).is_some_and(is_base_char)) {
            lex_number(&mut cur);
            TokenKind::Number(src[start.offset..cur.offset].to_owned())
        } else if let Some((text, kind)) = PUNCT.iter().find(|(p, _)| cur.starts_with(p)) {
            for _ in 0..text.len() {
                cur.bump();
            }
            kind.clone()
                .unwrap_or_else(|| TokenKind::Unsupported((*text).to_owned()))
        } else {
            cur.bump();
            TokenKind::Unknown(c.to_string())
        };
        tokens.push(Token {
            kind,
            start,
            end: cur.pos(),
        });
    }
}

fn is_base_char(c: char) -> bool {
    matches!(c, 'b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H' | 's' | 'S')
}

fn lex_number(cur: &mut Cursor<'_>) {
    cur.eat_while(|c| c.is_ascii_digit() || c == '_');
    if cur.peek() == Some('\'') && cur.peek_nth(1).is_some_and(is_base_char) {
        cur.bump();
        if matches!(cur.peek(), Some('s' | 'S')) {
            cur.bump();
        }
        if cur.peek().is_some_and(is_base_char) {
            cur.bump();
        }
        cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '?');
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn implication_operators_take_longest_match() {
        assert_eq!(
            kinds("a |-> b |=> c -> d | e"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::OverlapImpl,
                TokenKind::Ident("b".into()),
                TokenKind::NonOverlapImpl,
                TokenKind::Ident("c".into()),
                TokenKind::Arrow,
                TokenKind::Ident("d".into()),
                TokenKind::Pipe,
                TokenKind::Ident("e".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn broken_implication_lexes_as_pipe_then_gt() {
        assert_eq!(
            kinds("a |> b")[1..3],
            [TokenKind::Pipe, TokenKind::Gt]
        );
    }

    #[test]
    fn sized_literals_and_system_calls() {
        assert_eq!(
            kinds("12'h0 $past(x, 1)"),
            vec![
                TokenKind::Number("12'h0".into()),
                TokenKind::SystemIdent("$past".into()),
                TokenKind::LParen,
                TokenKind::Ident("x".into()),
                TokenKind::Comma,
                TokenKind::Number("1".into()),
                TokenKind::RParen,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn comments_are_skipped_and_positions_track_lines() {
        let toks = tokenize("// hello\n  /* x\n y */ foo");
        assert_eq!(toks[0].kind, TokenKind::Ident("foo".into()));
        assert_eq!((toks[0].start.line, toks[0].start.col), (3, 7));
        assert_eq!((toks[0].end.line, toks[0].end.col), (3, 10));
    }

    #[test]
    fn sequence_delay_is_flagged_unsupported() {
        assert_eq!(kinds("##1")[0], TokenKind::Unsupported("##".into()));
    }
}
