//! Property AST for the SVA subset accepted by the parser.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Posedge,
    Negedge,
}

impl Edge {
    pub fn keyword(self) -> &'static str {
        match self {
            Edge::Posedge => "posedge",
            Edge::Negedge => "negedge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clocking {
    pub edge: Edge,
    pub signal: String,
}

/// A parsed `property ... endproperty` block together with its `assert property`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyAst {
    pub name: String,
    pub clocking: Option<Clocking>,
    pub body: PropExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImplicationKind {
    /// `|->`
    Overlapping,
    /// `|=>`
    NonOverlapping,
    /// `->`
    Boolean,
}

impl ImplicationKind {
    pub fn symbol(self) -> &'static str {
        match self {
            ImplicationKind::Overlapping => "|->",
            ImplicationKind::NonOverlapping => "|=>",
            ImplicationKind::Boolean => "->",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    LogicalOr,
    LogicalAnd,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 13] = [
        BinaryOp::LogicalOr,
        BinaryOp::LogicalAnd,
        BinaryOp::BitOr,
        BinaryOp::BitXor,
        BinaryOp::BitAnd,
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::Lt,
        BinaryOp::Le,
        BinaryOp::Gt,
        BinaryOp::Ge,
        BinaryOp::Add,
        BinaryOp::Sub,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::LogicalOr => "||",
            BinaryOp::LogicalAnd => "&&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::BitAnd => "&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
        }
    }

    /// Binding strength; larger binds tighter. Implications sit below all of these at 0.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::LogicalOr => 1,
            BinaryOp::LogicalAnd => 2,
            BinaryOp::BitOr => 3,
            BinaryOp::BitXor => 4,
            BinaryOp::BitAnd => 5,
            BinaryOp::Eq | BinaryOp::Ne => 6,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 7,
            BinaryOp::Add | BinaryOp::Sub => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    BitNot,
    Neg,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::Neg => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiteralBase {
    Binary,
    Octal,
    Decimal,
    Hex,
    /// A bare decimal number such as `1`.
    UnsizedDecimal,
}

impl LiteralBase {
    pub fn radix(self) -> u32 {
        match self {
            LiteralBase::Binary => 2,
            LiteralBase::Octal => 8,
            LiteralBase::Decimal | LiteralBase::UnsizedDecimal => 10,
            LiteralBase::Hex => 16,
        }
    }

    pub fn marker(self) -> Option<char> {
        match self {
            LiteralBase::Binary => Some('b'),
            LiteralBase::Octal => Some('o'),
            LiteralBase::Decimal => Some('d'),
            LiteralBase::Hex => Some('h'),
            LiteralBase::UnsizedDecimal => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub width: Option<u32>,
    pub base: LiteralBase,
    pub value: u64,
}

impl Literal {
    pub fn plain(value: u64) -> Self {
        Literal {
            width: None,
            base: LiteralBase::UnsizedDecimal,
            value,
        }
    }

    pub fn fits_width(&self) -> bool {
        match self.width {
            Some(w) if w < 64 => self.value < (1u64 << w),
            _ => true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base.marker() {
            None => write!(f, "{}", self.value),
            Some(m) => {
                if let Some(w) = self.width {
                    write!(f, "{w}")?;
                }
                write!(f, "'{m}")?;
                match self.base {
                    LiteralBase::Binary => write!(f, "{:b}", self.value),
                    LiteralBase::Octal => write!(f, "{:o}", self.value),
                    LiteralBase::Hex => write!(f, "{:x}", self.value),
                    _ => write!(f, "{}", self.value),
                }
            }
        }
    }
}

/// Bit select `[i]` (low absent) or part select `[high:low]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Index {
    pub high: u64,
    pub low: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropExpr {
    Implication {
        kind: ImplicationKind,
        antecedent: Box<PropExpr>,
        consequent: Box<PropExpr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<PropExpr>,
        rhs: Box<PropExpr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<PropExpr>,
    },
    Past {
        expr: Box<PropExpr>,
        depth: Option<u32>,
    },
    Ident {
        name: String,
        index: Option<Index>,
    },
    Literal(Literal),
}

impl PropExpr {
    pub fn ident(name: impl Into<String>) -> Self {
        PropExpr::Ident {
            name: name.into(),
            index: None,
        }
    }

    pub fn bit(name: impl Into<String>, bit: u64) -> Self {
        PropExpr::Ident {
            name: name.into(),
            index: Some(Index {
                high: bit,
                low: None,
            }),
        }
    }

    pub fn binary(op: BinaryOp, lhs: PropExpr, rhs: PropExpr) -> Self {
        PropExpr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn unary(op: UnaryOp, operand: PropExpr) -> Self {
        PropExpr::Unary {
            op,
            operand: Box::new(operand),
        }
    }

    pub fn implies(kind: ImplicationKind, antecedent: PropExpr, consequent: PropExpr) -> Self {
        PropExpr::Implication {
            kind,
            antecedent: Box::new(antecedent),
            consequent: Box::new(consequent),
        }
    }

    pub fn past(expr: PropExpr, depth: Option<u32>) -> Self {
        PropExpr::Past {
            expr: Box::new(expr),
            depth,
        }
    }

    /// 0 for implications, the operator's precedence for binaries, above every binary otherwise.
    pub(crate) fn binding(&self) -> u8 {
        match self {
            PropExpr::Implication { .. } => 0,
            PropExpr::Binary { op, .. } => op.precedence(),
            PropExpr::Unary { .. } => 9,
            _ => 10,
        }
    }

    pub(crate) fn collect_idents<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            PropExpr::Implication {
                antecedent,
                consequent,
                ..
            } => {
                antecedent.collect_idents(out);
                consequent.collect_idents(out);
            }
            PropExpr::Binary { lhs, rhs, .. } => {
                lhs.collect_idents(out);
                rhs.collect_idents(out);
            }
            PropExpr::Unary { operand, .. } => operand.collect_idents(out),
            PropExpr::Past { expr, .. } => expr.collect_idents(out),
            PropExpr::Ident { name, .. } => {
                out.insert(name.as_str());
            }
            PropExpr::Literal(_) => {}
        }
    }
}

impl PropertyAst {
    /// Every distinct signal the property refers to, the clock included.
    pub fn signals(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        if let Some(c) = &self.clocking {
            names.insert(c.signal.as_str());
        }
        self.body.collect_idents(&mut names);
        names.into_iter().map(str::to_owned).collect()
    }
}
