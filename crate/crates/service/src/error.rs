use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use drh_client::api::ErrorBody;
use drh_core::DrhError;

/// Service-level error: a status code plus the stable JSON error body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
    pub position: Option<u64>,
}

impl ApiError {
    pub fn bad_request(kind: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind,
            message: message.into(),
            position: None,
        }
    }
}

impl From<DrhError> for ApiError {
    fn from(err: DrhError) -> ApiError {
        let (status, kind, position) = match &err {
            DrhError::Parse { position, .. } => {
                (StatusCode::BAD_REQUEST, "parse", Some(*position as u64))
            }
            DrhError::Config(_) | DrhError::CostOverflow { .. } | DrhError::PartialBlock { .. } => {
                (StatusCode::BAD_REQUEST, "config", None)
            }
            DrhError::CodebookMismatch(_) => (StatusCode::CONFLICT, "codebook_mismatch", None),
            DrhError::CorruptIndex(_) => (StatusCode::UNPROCESSABLE_ENTITY, "corrupt_index", None),
            DrhError::BeamExtinct { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "beam_extinct", None)
            }
            DrhError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "io", None),
        };
        ApiError {
            status,
            kind,
            message: err.to_string(),
            position,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.message,
            kind: self.kind.to_string(),
            position: self.position,
        };
        (self.status, Json(body)).into_response()
    }
}
