use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mle_core::game::EngineError;
use mle_core::store::StoreError;
use serde::Serialize;
use serde_json::{json, Value};

/// Error envelope returned by every route: `{code, message, details?}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<&'a Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), details: None }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::bad_request("MALFORMED_BODY", message)
    }

    pub fn bad_token() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "BAD_TOKEN", "missing or invalid bearer token")
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "UNKNOWN_SESSION", format!("unknown session {id}"))
    }

    pub fn storage(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "STORAGE_ERROR", message)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status.as_u16(), self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

fn engine_status(error: &EngineError) -> StatusCode {
    match error {
        EngineError::InvalidPack(_) => StatusCode::INTERNAL_SERVER_ERROR,
        EngineError::Validation(_)
        | EngineError::Payload(_)
        | EngineError::UnknownCard(_)
        | EngineError::InvalidPile(_)
        | EngineError::UnknownOption { .. } => StatusCode::BAD_REQUEST,
        EngineError::Phase { .. }
        | EngineError::DeckMismatch { .. }
        | EngineError::CardAlreadyUsed(_)
        | EngineError::PendingAnswer(_)
        | EngineError::NotOnTop(_)
        | EngineError::AlreadyUncovered(_)
        | EngineError::CardNotInPlay(_)
        | EngineError::NoPendingQuestion
        | EngineError::QuestionMismatch { .. }
        | EngineError::EscapeConditionUnmet { .. } => StatusCode::CONFLICT,
    }
}

fn engine_details(error: &EngineError) -> Option<Value> {
    match error {
        EngineError::Phase { operation, phase } => Some(json!({"operation": operation, "phase": phase.as_str()})),
        EngineError::DeckMismatch { card, expected, actual } => {
            Some(json!({"card_id": card, "expected": expected, "actual": actual}))
        }
        EngineError::QuestionMismatch { expected, got } => Some(json!({"expected": expected, "got": got})),
        EngineError::EscapeConditionUnmet { missing_items, remaining } => {
            Some(json!({"missing_items": missing_items, "remaining": remaining}))
        }
        EngineError::InvalidPile(pile) => Some(json!({"pile_index": pile})),
        _ => None,
    }
}

impl From<EngineError> for ApiError {
    fn from(error: EngineError) -> Self {
        ApiError {
            status: engine_status(&error),
            code: error.code(),
            message: error.to_string(),
            details: engine_details(&error),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(error: StoreError) -> Self {
        match &error {
            StoreError::SequenceConflict { expected, got, .. } => {
                ApiError::new(StatusCode::CONFLICT, "SEQUENCE_CONFLICT", "the session changed concurrently; retry")
                    .with_details(json!({"expected_seq": expected, "attempted_seq": got}))
            }
            _ => ApiError::storage(error.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = self.code, message = %self.message, "request failed");
        }
        let body = Envelope { code: self.code, message: &self.message, details: self.details.as_ref() };
        (self.status, Json(body)).into_response()
    }
}
