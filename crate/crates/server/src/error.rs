use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    InvalidParams,
    DomainError,
    NotFound,
    Conflict,
    IoError,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::InvalidParams => StatusCode::BAD_REQUEST,
            ErrorCode::DomainError => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::IoError => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::InvalidParams, message)
    }
}

impl From<rzchart::Error> for ApiError {
    fn from(e: rzchart::Error) -> Self {
        use rzchart::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidParameter { name, .. } => ApiError {
                detail: Some(json!({ "parameter": name })),
                ..ApiError::invalid(message)
            },
            E::LengthMismatch { index, expected, x, y } => ApiError {
                detail: Some(json!({ "index": index, "expected": expected, "x": x, "y": y })),
                ..ApiError::invalid(message)
            },
            E::InvalidSample(_) | E::Json(_) | E::Csv(_) => ApiError::invalid(message),
            E::Domain(_) => ApiError::new(ErrorCode::DomainError, message),
            E::NotFound(_) => ApiError::new(ErrorCode::NotFound, message),
            E::RunCompleted(_) => ApiError::new(ErrorCode::Conflict, message),
            E::Io(_) => {
                log::error!("{message}");
                ApiError::new(ErrorCode::IoError, message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}
