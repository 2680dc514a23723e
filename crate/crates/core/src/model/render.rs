use std::fmt::Write;

use super::expr::{Expr, UnaryOp};
use super::parse::KEYWORDS;

const NOT_PREC: u8 = 2;
const NEG_PREC: u8 = 6;
const ATOM_PREC: u8 = 8;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op.precedence(),
        Expr::Unary { op: UnaryOp::Not, .. } => NOT_PREC,
        Expr::Unary { op: UnaryOp::Negate, .. } => NEG_PREC,
        _ => ATOM_PREC,
    }
}

fn is_bare_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    (first.is_alphabetic() || first == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && !KEYWORDS.iter().any(|k| name.eq_ignore_ascii_case(k))
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Number(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Identifier(name) => {
            if is_bare_identifier(name) {
                out.push_str(name);
            } else {
                out.push('"');
                for c in name.chars() {
                    if c == '"' || c == '\\' {
                        out.push('\\');
                    }
                    out.push(c);
                }
                out.push('"');
            }
        }
        Expr::Unary { op, child } => {
            let (prefix, prec) = match op {
                UnaryOp::Negate => ("-", NEG_PREC),
                UnaryOp::Not => ("not ", NOT_PREC),
            };
            out.push_str(prefix);
            // A negated literal is always parenthesized so `-(-1)` does not
            // lex as a number with a sign baked in.
            let wrap = precedence(child) < prec || (*op == UnaryOp::Negate && matches!(**child, Expr::Number(v) if v < 0.0));
            write_child(out, child, wrap);
        }
        Expr::Binary { op, left, right } => {
            let prec = op.precedence();
            write_child(out, left, precedence(left) < prec || is_negative_literal(left));
            let _ = write!(out, " {} ", op.symbol());
            // Right operands of equal precedence need parentheses since every
            // tier is left-associative.
            write_child(out, right, precedence(right) <= prec || is_negative_literal(right));
        }
        Expr::Call { function, args } => {
            out.push_str(function.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

fn is_negative_literal(e: &Expr) -> bool {
    matches!(e, Expr::Number(v) if v.is_sign_negative())
}

fn write_child(out: &mut String, e: &Expr, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

/// Renders `ast` as equation text with minimal parentheses. Parsing the
/// output yields the same tree for every tree with nonnegative literals.
pub fn render_equation(ast: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, ast);
    out
}
