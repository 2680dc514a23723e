use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Every diagnostic code the parser and validator can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    /// An equation names an identifier that is not a model variable.
    UnresolvedReference,
    /// Two variables share a canonical name; the first one is kept.
    DuplicateName,
    /// A stock without an initial value.
    MissingInitial,
    /// A flow or auxiliary without an equation.
    MissingEquation,
    /// A flow attached to no stock.
    OrphanFlow,
    /// A stock lists an inflow/outflow that is not a flow variable.
    UnknownFlow,
    /// A constant whose equation has dependencies.
    ConstantWithDependencies,
    /// A view position naming no variable.
    DanglingView,
    /// A variable whose equation references itself.
    SelfReference,
    /// An equation that is not valid in the supported grammar.
    EquationSyntax,
    /// Arrays, graphical functions, conveyors, unknown builtins and the like.
    UnsupportedConstruct,
    /// A non-model XMILE section (style, macros, groups, ...).
    SkippedSection,
    /// An element in a vendor namespace.
    VendorElement,
    /// Simulation specs that are missing fields or violate stop > start, dt > 0.
    InvalidSimSpec,
}

impl DiagnosticCode {
    pub const ALL: [DiagnosticCode; 14] = [
        DiagnosticCode::UnresolvedReference,
        DiagnosticCode::DuplicateName,
        DiagnosticCode::MissingInitial,
        DiagnosticCode::MissingEquation,
        DiagnosticCode::OrphanFlow,
        DiagnosticCode::UnknownFlow,
        DiagnosticCode::ConstantWithDependencies,
        DiagnosticCode::DanglingView,
        DiagnosticCode::SelfReference,
        DiagnosticCode::EquationSyntax,
        DiagnosticCode::UnsupportedConstruct,
        DiagnosticCode::SkippedSection,
        DiagnosticCode::VendorElement,
        DiagnosticCode::InvalidSimSpec,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::UnresolvedReference => "unresolved_reference",
            DiagnosticCode::DuplicateName => "duplicate_name",
            DiagnosticCode::MissingInitial => "missing_initial",
            DiagnosticCode::MissingEquation => "missing_equation",
            DiagnosticCode::OrphanFlow => "orphan_flow",
            DiagnosticCode::UnknownFlow => "unknown_flow",
            DiagnosticCode::ConstantWithDependencies => "constant_with_dependencies",
            DiagnosticCode::DanglingView => "dangling_view",
            DiagnosticCode::SelfReference => "self_reference",
            DiagnosticCode::EquationSyntax => "equation_syntax",
            DiagnosticCode::UnsupportedConstruct => "unsupported_construct",
            DiagnosticCode::SkippedSection => "skipped_section",
            DiagnosticCode::VendorElement => "vendor_element",
            DiagnosticCode::InvalidSimSpec => "invalid_sim_spec",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Variable(String),
    Offset(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Variable(v) => f.write_str(v),
            Location::Offset(o) => write!(f, "@{o}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn warning(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn at_variable(mut self, name: impl Into<String>) -> Self {
        self.location = Some(Location::Variable(name.into()));
        self
    }

    pub fn at_offset(mut self, offset: usize) -> Self {
        self.location = Some(Location::Offset(offset));
        self
    }
}

// Errors before warnings, then by location (unlocated last), code and message.
impl Ord for Diagnostic {
    fn cmp(&self, other: &Self) -> Ordering {
        let loc = |d: &Diagnostic| (d.location.is_none(), d.location.clone());
        self.severity
            .cmp(&other.severity)
            .then_with(|| loc(self).cmp(&loc(other)))
            .then_with(|| self.code.cmp(&other.code))
            .then_with(|| self.message.cmp(&other.message))
    }
}

impl PartialOrd for Diagnostic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.location {
            Some(loc) => write!(f, "{sev}[{}] {loc}: {}", self.code, self.message),
            None => write!(f, "{sev}[{}] {}", self.code, self.message),
        }
    }
}
