use std::fmt;

use serde::{Deserialize, Serialize};

use super::lexer::Pos;

/// Upper bound on diagnostics reported for one assertion, which keeps repair prompts bounded.
pub const MAX_DIAGNOSTICS: usize = 20;

/// A positioned syntax problem. Renders as
/// `line L, col C: MESSAGE (found 'X', expected Y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub found: String,
    pub expected: Vec<String>,
}

impl SyntaxDiagnostic {
    pub(crate) fn new(pos: Pos, message: impl Into<String>, found: impl Into<String>, expected: &[&str]) -> Self {
        let message: String = message.into();
        SyntaxDiagnostic {
            line: pos.line,
            column: pos.col,
            message: message.replace('\n', " "),
            found: found.into(),
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

impl SyntaxDiagnostic {
    /// The message without its position: `MESSAGE (found 'X', expected Y)`.
    pub fn detail(&self) -> String {
        let mut s = format!("{} (found '{}'", self.message, self.found);
        if !self.expected.is_empty() {
            s.push_str(", expected ");
            s.push_str(&self.expected.join(" or "));
        }
        s.push(')');
        s
    }
}

impl fmt::Display for SyntaxDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.column, self.detail())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_single_line_format() {
        let d = SyntaxDiagnostic::new(
            Pos { line: 3, col: 7, offset: 0 },
            "unexpected token",
            ">",
            &["expression"],
        );
        assert_eq!(d.to_string(), "line 3, col 7: unexpected token (found '>', expected expression)");
        let d = SyntaxDiagnostic::new(Pos { line: 1, col: 1, offset: 0 }, "x", "y", &["';'", "'endproperty'"]);
        assert_eq!(d.to_string(), "line 1, col 1: x (found 'y', expected ';' or 'endproperty')");
    }
}
