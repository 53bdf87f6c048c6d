use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use glycotrack_core::{Error, Violation};
use serde::Serialize;

/// An API failure before localization. The `localize` middleware turns it
/// into the JSON error envelope in the caller's language.
#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub details: Vec<Violation>,
}

/// Marker carried in response extensions until the body is rendered.
#[derive(Debug, Clone)]
pub(crate) struct PendingError {
    pub code: &'static str,
    pub details: Vec<Violation>,
}

/// The error envelope every non-2xx response carries.
#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub status: u16,
    pub code: &'a str,
    pub message: &'a str,
    pub details: &'a [Violation],
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str) -> Self {
        ApiError {
            status,
            code,
            details: Vec::new(),
        }
    }

    pub fn unauthenticated() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthenticated")
    }

    pub fn invalid_token() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "invalid_token")
    }

    pub fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found")
    }

    pub fn forbidden(code: &'static str) -> Self {
        Self::new(StatusCode::FORBIDDEN, code)
    }

    pub fn validation(details: Vec<Violation>) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code: "validation",
            details,
        }
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::validation(vec![Violation::new(code, message)])
    }

    pub fn invalid_body(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code: "invalid_body",
            details: vec![Violation::new("body.malformed", message)],
        }
    }

    /// Code used when a framework-level rejection has no explicit error.
    pub(crate) fn code_for_status(status: StatusCode) -> &'static str {
        match status {
            StatusCode::BAD_REQUEST => "bad_request",
            StatusCode::UNAUTHORIZED => "unauthenticated",
            StatusCode::FORBIDDEN => "no_link",
            StatusCode::NOT_FOUND => "not_found",
            StatusCode::METHOD_NOT_ALLOWED => "method_not_allowed",
            StatusCode::PAYLOAD_TOO_LARGE => "payload_too_large",
            StatusCode::UNSUPPORTED_MEDIA_TYPE => "unsupported_media_type",
            StatusCode::UNPROCESSABLE_ENTITY => "invalid_body",
            _ => "internal",
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(v) => ApiError::validation(v),
            Error::NotFound(_) => ApiError::not_found(),
            Error::Conflict(code) => ApiError::new(StatusCode::CONFLICT, code),
            Error::Forbidden(code) => ApiError::forbidden(code),
            other => {
                tracing::error!(error = %other, "internal error");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut res = self.status.into_response();
        res.extensions_mut().insert(PendingError {
            code: self.code,
            details: self.details,
        });
        res
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
