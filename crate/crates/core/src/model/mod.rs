//! Domain types for system-dynamics models and the equation language used in
//! XMILE `<eqn>` elements.

mod diagnostic;
mod eval;
mod expr;
mod name;
mod parse;
mod render;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diagnostic::{Diagnostic, DiagnosticCode, Location, Severity};
pub use eval::evaluate;
pub use expr::{dependencies, BinaryOp, Builtin, Expr, UnaryOp};
pub use name::canonicalize_name;
pub use parse::parse_equation;
pub use render::render_equation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("name is empty")]
    EmptyName,
    #[error("syntax error at offset {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("function {name} takes {expected} arguments, got {got}")]
    BadArity {
        name: String,
        expected: &'static str,
        got: usize,
    },
    #[error("unbound identifier {0}")]
    UnboundIdentifier(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Stock,
    Flow,
    Auxiliary,
    Constant,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Stock => "stock",
            VariableKind::Flow => "flow",
            VariableKind::Auxiliary => "auxiliary",
            VariableKind::Constant => "constant",
        }
    }
}

/// A variable's defining equation. Constructs outside the supported grammar
/// are kept verbatim and contribute no dependencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Equation {
    Parsed { ast: Expr },
    Opaque { text: String },
}

impl Equation {
    pub fn ast(&self) -> Option<&Expr> {
        match self {
            Equation::Parsed { ast } => Some(ast),
            Equation::Opaque { .. } => None,
        }
    }

    pub fn dependencies(&self) -> std::collections::BTreeSet<String> {
        self.ast().map(dependencies).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub display_name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<Equation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Equation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inflows: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outflows: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub documentation: Option<String>,
}

impl Variable {
    /// A variable with the given display name and kind and nothing else set.
    pub fn new(display_name: &str, kind: VariableKind) -> Result<Self, ModelError> {
        Ok(Self {
            name: canonicalize_name(display_name)?,
            display_name: display_name.trim().to_string(),
            kind,
            equation: None,
            initial: None,
            inflows: Vec::new(),
            outflows: Vec::new(),
            units: None,
            documentation: None,
        })
    }

    /// Builder-style helper: parse `src` as this variable's equation
    /// (or initial value, for stocks).
    pub fn with_equation(mut self, src: &str) -> Result<Self, ModelError> {
        let eq = Equation::Parsed {
            ast: parse_equation(src)?,
        };
        if self.kind == VariableKind::Stock {
            self.initial = Some(eq);
        } else {
            self.equation = Some(eq);
        }
        Ok(self)
    }

    pub fn with_inflow(mut self, flow: &str) -> Result<Self, ModelError> {
        self.inflows.push(canonicalize_name(flow)?);
        Ok(self)
    }

    pub fn with_outflow(mut self, flow: &str) -> Result<Self, ModelError> {
        self.outflows.push(canonicalize_name(flow)?);
        Ok(self)
    }

    /// True when `expr` is a numeric literal, optionally negated.
    pub fn is_literal(expr: &Expr) -> bool {
        match expr {
            Expr::Number(_) => true,
            Expr::Unary { op: UnaryOp::Negate, child } => matches!(**child, Expr::Number(_)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub start: f64,
    pub stop: f64,
    pub dt: f64,
}

impl SimSpec {
    pub fn is_valid(&self) -> bool {
        self.stop > self.start && self.dt > 0.0
    }
}

/// Diagram position of a variable as given by the source document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewHint {
    pub variable: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemModel {
    pub name: String,
    pub variables: Vec<Variable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_spec: Option<SimSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub views: Vec<ViewHint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl SystemModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn with_variable(mut self, var: Variable) -> Self {
        self.variables.push(var);
        self
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn stock_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VariableKind::Stock).count()
    }

    /// Variables keyed by canonical name; on duplicates the first wins.
    pub fn variables_by_name(&self) -> BTreeMap<&str, &Variable> {
        let mut map = BTreeMap::new();
        for v in &self.variables {
            map.entry(v.name.as_str()).or_insert(v);
        }
        map
    }
}
