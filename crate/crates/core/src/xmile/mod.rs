//! XMILE (OASIS v1.0) reading and writing.
//!
//! Parsing is lenient: anything short of malformed XML, a foreign format or an
//! empty model becomes a [`Diagnostic`](crate::model::Diagnostic) on the
//! returned [`SystemModel`](crate::model::SystemModel).

mod dom;
mod equality;
mod parse;
mod serialize;
mod validate;

use thiserror::Error;

pub use equality::{structural_difference, structurally_equal};
pub use parse::parse_xmile;
pub use serialize::serialize_xmile;
pub use validate::validate_model;

pub const XMILE_NAMESPACE: &str = "http://docs.oasis-open.org/xmile/ns/XMILE/v1.0";
pub const XMILE_NAMESPACE_HTTPS: &str = "https://docs.oasis-open.org/xmile/ns/XMILE/v1.0";
pub const XMILE_VERSION: &str = "1.0";

/// File extensions tried during ingestion. Detection itself is by namespace.
pub const MODEL_EXTENSIONS: [&str; 3] = ["xmile", "stmx", "xml"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum XmileError {
    #[error("malformed XML at offset {offset}: {message}")]
    MalformedXml { offset: usize, message: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("model contains no variables")]
    EmptyModel,
    #[error("model has error diagnostics and cannot be serialized")]
    ModelHasErrors,
    #[error("variable {0} has an opaque equation that cannot be round-tripped")]
    OpaqueEquation(String),
}

impl XmileError {
    /// Short machine tag used in ingestion reports and error codes.
    pub fn code(&self) -> &'static str {
        match self {
            XmileError::MalformedXml { .. } => "malformed_xml",
            XmileError::UnsupportedFormat(_) => "unsupported_format",
            XmileError::EmptyModel => "empty_model",
            XmileError::ModelHasErrors => "model_has_errors",
            XmileError::OpaqueEquation(_) => "opaque_equation",
        }
    }
}
