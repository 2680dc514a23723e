use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use crate::catalog::CatalogError;
use crate::narrative::NarrativeError;

/// Every `code` an error body can carry.
pub const ERROR_CODES: &[&str] = &[
    "not_found",
    "method_not_allowed",
    "malformed_body",
    "bad_query",
    "empty_query",
    "bad_limit",
    "bad_sdg",
    "empty_question",
    "no_edits_parsed",
    "no_model",
    "invalid_diagram",
    "edit_conflict",
    "analysis_failed",
    "adapter_unavailable",
    "adapter_timeout",
    "internal",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(ERROR_CODES.contains(&code), "undocumented error code {code}");
        Self { status: status.as_u16(), code, message: message.into(), details: None }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_body", message)
    }

    pub fn internal() -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::EmptyQuery => Self::new(StatusCode::BAD_REQUEST, "empty_query", e.to_string()),
            CatalogError::BadLimit(_) => Self::new(StatusCode::BAD_REQUEST, "bad_limit", e.to_string()),
            CatalogError::BadSdg(_) => Self::new(StatusCode::BAD_REQUEST, "bad_sdg", e.to_string()),
            _ => Self::internal(),
        }
    }
}

impl From<NarrativeError> for ApiError {
    fn from(e: NarrativeError) -> Self {
        use NarrativeError::*;
        let message = e.to_string();
        match e {
            NoEditsParsed { unparsed } => Self::new(StatusCode::BAD_REQUEST, "no_edits_parsed", message)
                .with_details(serde_json::json!({ "unparsed": unparsed })),
            EditConflict { index, .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "edit_conflict", message)
                .with_details(serde_json::json!({ "index": index })),
            DanglingReference(_) | DuplicateLink { .. } | DuplicateVariable(_) | InvalidName(_) | InconsistentLoops(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_diagram", message)
            }
            Graph(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "analysis_failed", message),
            Adapter(crate::narrative::AdapterError::Timeout) => {
                Self::new(StatusCode::GATEWAY_TIMEOUT, "adapter_timeout", message)
            }
            Adapter(_) => Self::new(StatusCode::SERVICE_UNAVAILABLE, "adapter_unavailable", message),
        }
    }
}
