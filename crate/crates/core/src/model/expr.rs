use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnaryOp {
    Negate,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter. Prefix `not` sits at 2 and
    /// unary minus at 6.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::And | BinaryOp::Or => 1,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
            BinaryOp::Pow => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        self.precedence() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Builtin {
    Min,
    Max,
    Abs,
    Exp,
    Ln,
    Sqrt,
    Int,
    IfThenElse,
    Safediv,
}

impl Builtin {
    pub const ALL: [Builtin; 9] = [
        Builtin::Min,
        Builtin::Max,
        Builtin::Abs,
        Builtin::Exp,
        Builtin::Ln,
        Builtin::Sqrt,
        Builtin::Int,
        Builtin::IfThenElse,
        Builtin::Safediv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Min => "MIN",
            Builtin::Max => "MAX",
            Builtin::Abs => "ABS",
            Builtin::Exp => "EXP",
            Builtin::Ln => "LN",
            Builtin::Sqrt => "SQRT",
            Builtin::Int => "INT",
            Builtin::IfThenElse => "IF_THEN_ELSE",
            Builtin::Safediv => "SAFEDIV",
        }
    }

    /// Case-insensitive lookup.
    pub fn from_name(name: &str) -> Option<Builtin> {
        let upper = name.to_ascii_uppercase();
        Builtin::ALL.into_iter().find(|b| b.name() == upper)
    }

    pub fn accepts_arity(self, n: usize) -> bool {
        match self {
            Builtin::IfThenElse => n == 3,
            Builtin::Safediv => n == 2 || n == 3,
            Builtin::Min | Builtin::Max => n >= 2,
            _ => n == 1,
        }
    }

    pub(crate) fn arity_label(self) -> &'static str {
        match self {
            Builtin::IfThenElse => "3",
            Builtin::Safediv => "2 or 3",
            Builtin::Min | Builtin::Max => "at least 2",
            _ => "1",
        }
    }
}

/// Equation syntax tree. Identifiers are stored in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Number(f64),
    Identifier(String),
    Unary {
        op: UnaryOp,
        child: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Call {
        function: Builtin,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Identifier(name.to_string())
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Expr {
        Expr::Unary {
            op,
            child: Box::new(child),
        }
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Builds a call, checking the builtin's arity.
    pub fn call(function: Builtin, args: Vec<Expr>) -> Result<Expr, ModelError> {
        if !function.accepts_arity(args.len()) {
            return Err(ModelError::BadArity {
                name: function.name().to_string(),
                expected: function.arity_label(),
                got: args.len(),
            });
        }
        Ok(Expr::Call { function, args })
    }

    /// Visits every identifier occurrence in pre-order.
    pub fn for_each_identifier<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Number(_) => {}
            Expr::Identifier(name) => f(name),
            Expr::Unary { child, .. } => child.for_each_identifier(f),
            Expr::Binary { left, right, .. } => {
                left.for_each_identifier(f);
                right.for_each_identifier(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.for_each_identifier(f)),
        }
    }
}

/// The set of identifiers occurring in `ast`.
pub fn dependencies(ast: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    ast.for_each_identifier(&mut |name| {
        out.insert(name.to_string());
    });
    out
}
