//! Translation between causal graphs, the structured diagram exchange form
//! and a small controlled English, plus the co-pilot adapter seam.

mod controlled;
mod copilot;
mod describe;
mod structured;

use thiserror::Error;

use crate::graph::GraphError;

pub use controlled::{apply_edits, parse_controlled_nl, ModelEdit, ParsedEdits, UnparsedSentence};
pub use copilot::{
    copilot_respond, AdapterError, CopilotAdapter, CopilotReply, CopilotRequest, DeterministicAdapter,
};
pub use describe::{describe, describe_diagram, NarrativeDocument};
pub use structured::{
    from_structured, loop_ids, to_structured, DiagramLink, DiagramLoop, DiagramVariable, StructuredDiagram,
    StructuredImport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NarrativeError {
    #[error("loop {0:?} uses a link that is not in the graph")]
    InconsistentLoops(Vec<String>),
    #[error("reference to undeclared variable {0}")]
    DanglingReference(String),
    #[error("duplicate link {from} -> {to}")]
    DuplicateLink { from: String, to: String },
    #[error("duplicate variable {0}")]
    DuplicateVariable(String),
    #[error("invalid variable name {0:?}")]
    InvalidName(String),
    #[error("no sentence matched the edit grammar")]
    NoEditsParsed { unparsed: Vec<UnparsedSentence> },
    #[error("edit {index} conflicts with the graph: {reason}")]
    EditConflict { index: usize, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

impl NarrativeError {
    pub fn code(&self) -> &'static str {
        match self {
            NarrativeError::InconsistentLoops(_) => "inconsistent_loops",
            NarrativeError::DanglingReference(_) => "dangling_reference",
            NarrativeError::DuplicateLink { .. } => "duplicate_link",
            NarrativeError::DuplicateVariable(_) => "duplicate_variable",
            NarrativeError::InvalidName(_) => "invalid_name",
            NarrativeError::NoEditsParsed { .. } => "no_edits_parsed",
            NarrativeError::EditConflict { .. } => "edit_conflict",
            NarrativeError::Graph(GraphError::LoopBudgetExceeded { .. }) => "loop_budget_exceeded",
            NarrativeError::Graph(_) => "invalid_graph",
            NarrativeError::Adapter(AdapterError::Timeout) => "adapter_timeout",
            NarrativeError::Adapter(_) => "adapter_unavailable",
        }
    }
}

/// Non-fatal findings when importing a structured diagram.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum NarrativeWarning {
    /// A declared loop disagrees with the loops recomputed from the links.
    LoopMismatch { id: String, message: String },
}
