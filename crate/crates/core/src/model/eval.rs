use std::collections::HashMap;

use super::expr::{BinaryOp, Builtin, Expr, UnaryOp};
use super::ModelError;

fn truth(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn domain(msg: impl Into<String>) -> ModelError {
    ModelError::DomainError(msg.into())
}

/// Evaluates `ast` against `bindings`. Comparisons and logic yield 1.0/0.0;
/// any nonzero value is true.
pub fn evaluate(ast: &Expr, bindings: &HashMap<String, f64>) -> Result<f64, ModelError> {
    match ast {
        Expr::Number(v) => Ok(*v),
        Expr::Identifier(name) => bindings
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnboundIdentifier(name.clone())),
        Expr::Unary { op, child } => {
            let v = evaluate(child, bindings)?;
            Ok(match op {
                UnaryOp::Negate => -v,
                UnaryOp::Not => truth(v == 0.0),
            })
        }
        Expr::Binary { op, left, right } => {
            let a = evaluate(left, bindings)?;
            let b = evaluate(right, bindings)?;
            match op {
                BinaryOp::Add => Ok(a + b),
                BinaryOp::Sub => Ok(a - b),
                BinaryOp::Mul => Ok(a * b),
                BinaryOp::Div => {
                    if b == 0.0 {
                        Err(ModelError::DivisionByZero)
                    } else {
                        Ok(a / b)
                    }
                }
                BinaryOp::Pow => {
                    if a == 0.0 && b < 0.0 {
                        return Err(domain("zero raised to a negative power"));
                    }
                    let v = a.powf(b);
                    if v.is_nan() {
                        return Err(domain(format!("{a} ^ {b} is not a real number")));
                    }
                    Ok(v)
                }
                BinaryOp::Lt => Ok(truth(a < b)),
                BinaryOp::Le => Ok(truth(a <= b)),
                BinaryOp::Gt => Ok(truth(a > b)),
                BinaryOp::Ge => Ok(truth(a >= b)),
                BinaryOp::Eq => Ok(truth(a == b)),
                BinaryOp::Ne => Ok(truth(a != b)),
                BinaryOp::And => Ok(truth(a != 0.0 && b != 0.0)),
                BinaryOp::Or => Ok(truth(a != 0.0 || b != 0.0)),
            }
        }
        Expr::Call { function, args } => call(*function, args, bindings),
    }
}

fn call(function: Builtin, args: &[Expr], bindings: &HashMap<String, f64>) -> Result<f64, ModelError> {
    // Every argument is evaluated (no short-circuit), so unbound identifiers
    // are reported regardless of which branch is taken.
    let vals = args
        .iter()
        .map(|a| evaluate(a, bindings))
        .collect::<Result<Vec<_>, _>>()?;
    match function {
        Builtin::Min => Ok(vals.iter().copied().fold(f64::INFINITY, f64::min)),
        Builtin::Max => Ok(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        Builtin::Abs => Ok(vals[0].abs()),
        Builtin::Exp => Ok(vals[0].exp()),
        Builtin::Ln => {
            if vals[0] <= 0.0 {
                Err(domain(format!("LN of non-positive value {}", vals[0])))
            } else {
                Ok(vals[0].ln())
            }
        }
        Builtin::Sqrt => {
            if vals[0] < 0.0 {
                Err(domain(format!("SQRT of negative value {}", vals[0])))
            } else {
                Ok(vals[0].sqrt())
            }
        }
        Builtin::Int => Ok(vals[0].floor()),
        Builtin::IfThenElse => Ok(if vals[0] != 0.0 { vals[1] } else { vals[2] }),
        Builtin::Safediv => {
            if vals[1] == 0.0 {
                Ok(vals.get(2).copied().unwrap_or(0.0))
            } else {
                Ok(vals[0] / vals[1])
            }
        }
    }
}
