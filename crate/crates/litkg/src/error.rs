//! The wire error envelope: `{"error": {"code", "message", "detail"?}}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use litkg_core::evidence::EvidenceError;
use litkg_core::export::UnknownFormat;
use litkg_core::facets::FacetError;
use litkg_core::figure::FigureError;
use litkg_core::ingest::IngestError;
use litkg_core::pathrank::PathError;
use litkg_core::report::ReportError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::store::StoreError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

/// HTTP status for a stable error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "UnknownEntity" | "UnknownEdge" | "UnknownSentence" | "NoPathFound" | "NotFound" => StatusCode::NOT_FOUND,
        "OverlappingLists" => StatusCode::UNPROCESSABLE_ENTITY,
        "DuplicatePaper" | "TypeConflict" => StatusCode::CONFLICT,
        "ProviderError" | "IoError" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status_for(code),
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
                detail: None,
            },
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = Some(detail);
        self
    }

    pub fn code(&self) -> &str {
        &self.body.code
    }

    pub fn envelope(&self) -> ErrorEnvelope {
        ErrorEnvelope { error: self.body.clone() }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.body.code, self.body.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.envelope())).into_response()
    }
}

impl From<PathError> for ApiError {
    fn from(e: PathError) -> Self {
        let err = ApiError::new(e.code(), e.to_string());
        match e {
            PathError::NoPathFound { src, dst, max_hops } => {
                err.with_detail(json!({"src": src, "dst": dst, "max_hops": max_hops}))
            }
            PathError::UnknownEntity(id) => err.with_detail(json!({"id": id})),
            _ => err,
        }
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let err = ApiError::new(e.code(), e.to_string());
        match e {
            IngestError::OverlappingLists(ids) => err.with_detail(json!({"paper_ids": ids})),
            IngestError::SchemaError { location, .. } | IngestError::SpanOutOfRange { location, .. } => {
                err.with_detail(json!({"location": location}))
            }
            IngestError::MalformedRow { line, .. } => err.with_detail(json!({"line": line})),
            _ => err,
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Ingest(e) => e.into(),
            other => ApiError::new(other.code(), other.to_string()),
        }
    }
}

macro_rules! plain {
    ($($t:ty),*) => {$(
        impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                ApiError::new(e.code(), e.to_string())
            }
        }
    )*};
}

plain!(EvidenceError, FacetError, ReportError, FigureError, UnknownFormat);
