//! Canonical pretty-printer. Emits the minimum parentheses needed for the
//! parser's precedence table, so `parse(render(a)) == a` for every valid AST.

use super::ast::*;

/// Renders a full assertion block: property declaration, clocking on its own
/// line, body, `endproperty`, and the matching `assert property` statement.
pub fn render(ast: &PropertyAst) -> String {
    let mut out = format!("property {};\n", ast.name);
    if let Some(c) = &ast.clocking {
        out.push_str(&format!("  @({} {})\n", c.edge.keyword(), c.signal));
    }
    out.push_str("  ");
    out.push_str(&render_expr(&ast.body));
    out.push_str(";\nendproperty\n");
    out.push_str(&format!("assert property ({});", ast.name));
    out
}

pub fn render_expr(expr: &PropExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn write_wrapped(expr: &PropExpr, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        write_expr(expr, out);
        out.push(')');
    } else {
        write_expr(expr, out);
    }
}

fn write_expr(expr: &PropExpr, out: &mut String) {
    match expr {
        PropExpr::Implication {
            kind,
            antecedent,
            consequent,
        } => {
            write_wrapped(antecedent, antecedent.binding() == 0, out);
            out.push(' ');
            out.push_str(kind.symbol());
            out.push(' ');
            write_expr(consequent, out);
        }
        PropExpr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_wrapped(lhs, lhs.binding() < p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_wrapped(rhs, rhs.binding() <= p, out);
        }
        PropExpr::Unary { op, operand } => {
            out.push_str(op.symbol());
            write_wrapped(operand, operand.binding() < 9, out);
        }
        PropExpr::Past { expr, depth } => {
            out.push_str("$past(");
            write_expr(expr, out);
            if let Some(d) = depth {
                out.push_str(&format!(", {d}"));
            }
            out.push(')');
        }
        PropExpr::Ident { name, index } => {
            out.push_str(name);
            match index {
                Some(Index { high, low: None }) => out.push_str(&format!("[{high}]")),
                Some(Index {
                    high,
                    low: Some(low),
                }) => out.push_str(&format!("[{high}:{low}]")),
                None => {}
            }
        }
        PropExpr::Literal(lit) => out.push_str(&lit.to_string()),
    }
}
