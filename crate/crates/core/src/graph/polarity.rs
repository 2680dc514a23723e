//! Link polarity from equation structure.
//!
//! Each occurrence of the dependency carries a sign that flips under
//! negation, as a subtrahend and inside a denominator. Co-factors must have a
//! known sign: literals contribute theirs, bare identifiers (and products or
//! quotients of them) count as nonnegative. Comparisons, logic, `^`, `ABS`
//! and `IF_THEN_ELSE` conditions make an occurrence unknown. The link is
//! positive or negative only when every occurrence agrees.

use super::{GraphError, Polarity};
use crate::model::{BinaryOp, Builtin, Expr, UnaryOp};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Sign {
    Pos,
    Neg,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

/// Sign of a co-factor, when it can be assumed.
fn factor_sign(e: &Expr) -> Option<Sign> {
    match e {
        Expr::Number(v) if *v > 0.0 => Some(Sign::Pos),
        Expr::Number(v) if *v < 0.0 => Some(Sign::Neg),
        Expr::Number(_) => None,
        Expr::Identifier(_) => Some(Sign::Pos),
        Expr::Unary { op: UnaryOp::Negate, child } => factor_sign(child).map(Sign::flip),
        Expr::Binary { op: BinaryOp::Mul | BinaryOp::Div, left, right } => {
            Some(factor_sign(left)?.times(factor_sign(right)?))
        }
        _ => None,
    }
}

fn mark_unknown(e: &Expr, dep: &str, out: &mut Vec<Option<Sign>>) {
    e.for_each_identifier(&mut |name| {
        if name == dep {
            out.push(None);
        }
    });
}

fn walk(e: &Expr, dep: &str, ctx: Option<Sign>, out: &mut Vec<Option<Sign>>) {
    let Some(sign) = ctx else {
        return mark_unknown(e, dep, out);
    };
    match e {
        Expr::Number(_) => {}
        Expr::Identifier(name) => {
            if name == dep {
                out.push(Some(sign));
            }
        }
        Expr::Unary { op: UnaryOp::Negate, child } => walk(child, dep, Some(sign.flip()), out),
        Expr::Unary { op: UnaryOp::Not, child } => mark_unknown(child, dep, out),
        Expr::Binary { op, left, right } => match op {
            BinaryOp::Add => {
                walk(left, dep, ctx, out);
                walk(right, dep, ctx, out);
            }
            BinaryOp::Sub => {
                walk(left, dep, ctx, out);
                walk(right, dep, Some(sign.flip()), out);
            }
            BinaryOp::Mul => {
                walk(left, dep, factor_sign(right).map(|s| sign.times(s)), out);
                walk(right, dep, factor_sign(left).map(|s| sign.times(s)), out);
            }
            BinaryOp::Div => {
                walk(left, dep, factor_sign(right).map(|s| sign.times(s)), out);
                walk(right, dep, factor_sign(left).map(|s| sign.flip().times(s)), out);
            }
            _ => mark_unknown(e, dep, out),
        },
        Expr::Call { function, args } => match function {
            // Nondecreasing in every argument.
            Builtin::Min | Builtin::Max | Builtin::Exp | Builtin::Ln | Builtin::Sqrt | Builtin::Int => {
                for a in args {
                    walk(a, dep, ctx, out);
                }
            }
            Builtin::Abs => mark_unknown(e, dep, out),
            Builtin::IfThenElse => {
                mark_unknown(&args[0], dep, out);
                walk(&args[1], dep, ctx, out);
                walk(&args[2], dep, ctx, out);
            }
            Builtin::Safediv => {
                walk(&args[0], dep, factor_sign(&args[1]).map(|s| sign.times(s)), out);
                walk(&args[1], dep, factor_sign(&args[0]).map(|s| sign.flip().times(s)), out);
                if let Some(alt) = args.get(2) {
                    walk(alt, dep, ctx, out);
                }
            }
        },
    }
}

/// Polarity of the influence of `dep` on the value of `ast`.
pub fn infer_polarity(ast: &Expr, dep: &str) -> Result<Polarity, GraphError> {
    let mut signs = Vec::new();
    walk(ast, dep, Some(Sign::Pos), &mut signs);
    let Some(first) = signs.first().copied() else {
        return Err(GraphError::DependencyAbsent(dep.to_string()));
    };
    Ok(match first {
        Some(s) if signs.iter().all(|x| *x == Some(s)) => match s {
            Sign::Pos => Polarity::Positive,
            Sign::Neg => Polarity::Negative,
        },
        _ => Polarity::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_equation;

    fn pol(src: &str, dep: &str) -> Polarity {
        infer_polarity(&parse_equation(src).unwrap(), dep).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(pol("population * birth_rate", "population"), Polarity::Positive);
        assert_eq!(pol("population / lifetime", "lifetime"), Polarity::Negative);
        assert_eq!(pol("a - b", "b"), Polarity::Negative);
        assert_eq!(pol("IF_THEN_ELSE(x > 0, y, -y)", "y"), Polarity::Unknown);
    }

    #[test]
    fn sign_context_rules() {
        assert_eq!(pol("a - b", "a"), Polarity::Positive);
        assert_eq!(pol("-a", "a"), Polarity::Negative);
        assert_eq!(pol("-(-a)", "a"), Polarity::Positive);
        assert_eq!(pol("a - (b - c)", "c"), Polarity::Positive);
        assert_eq!(pol("-3 * a", "a"), Polarity::Negative);
        assert_eq!(pol("a * -0.5", "a"), Polarity::Negative);
        assert_eq!(pol("1 / a", "a"), Polarity::Negative);
        assert_eq!(pol("-1 / a", "a"), Polarity::Positive);
        assert_eq!(pol("a / b / c", "c"), Polarity::Negative);
        assert_eq!(pol("x / (a / b)", "b"), Polarity::Positive);
        assert_eq!(pol("a * b * c", "b"), Polarity::Positive);
        assert_eq!(pol("a + a", "a"), Polarity::Positive);
        assert_eq!(pol("a - a", "a"), Polarity::Unknown);
        assert_eq!(pol("0 * a", "a"), Polarity::Unknown);
        // A co-factor whose own sign is not assumed makes the occurrence unknown.
        assert_eq!(pol("a * (b - c)", "a"), Polarity::Unknown);
        assert_eq!(pol("(a - b) * c", "a"), Polarity::Positive);
        assert_eq!(pol("a ^ 2", "a"), Polarity::Unknown);
        assert_eq!(pol("a > b", "a"), Polarity::Unknown);
        assert_eq!(pol("not a", "a"), Polarity::Unknown);
        assert_eq!(pol("ABS(a)", "a"), Polarity::Unknown);
    }

    #[test]
    fn builtins() {
        assert_eq!(pol("MAX(0, a - b)", "b"), Polarity::Negative);
        assert_eq!(pol("MIN(a, 3)", "a"), Polarity::Positive);
        assert_eq!(pol("EXP(-a)", "a"), Polarity::Negative);
        assert_eq!(pol("SQRT(a) + LN(a) + INT(a)", "a"), Polarity::Positive);
        assert_eq!(pol("SAFEDIV(a, b)", "b"), Polarity::Negative);
        assert_eq!(pol("SAFEDIV(a, b, -c)", "c"), Polarity::Negative);
        assert_eq!(pol("IF_THEN_ELSE(c, a, 2 * a)", "a"), Polarity::Positive);
        assert_eq!(pol("IF_THEN_ELSE(a > 1, 1, 0)", "a"), Polarity::Unknown);
    }

    #[test]
    fn absent_dependency() {
        let ast = parse_equation("a + b").unwrap();
        assert_eq!(infer_polarity(&ast, "c"), Err(GraphError::DependencyAbsent("c".into())));
    }
}
