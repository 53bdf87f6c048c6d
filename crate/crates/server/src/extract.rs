//! Request extractors whose failures become API errors.

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, FromRequestParts, Query, Request};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::Json;
use glycotrack_core::domain::{RecordId, RecordKind, UserId};
use serde::de::DeserializeOwned;

use crate::error::ApiError;

/// JSON body; malformed or mistyped bodies are 422, non-JSON is 415.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(JsonRejection::MissingJsonContentType(_)) => {
                Err(ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media_type"))
            }
            Err(e) => Err(ApiError::invalid_body(e.body_text())),
        }
    }
}

/// Query string; undecodable parameters are 422.
pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        match Query::<T>::from_request_parts(parts, state).await {
            Ok(Query(v)) => Ok(ApiQuery(v)),
            Err(e) => Err(ApiError::invalid("query.invalid", e.body_text())),
        }
    }
}

/// Path identifiers that do not parse name no resource: 404.
pub fn user_id(raw: &str) -> Result<UserId, ApiError> {
    raw.parse().map(UserId).map_err(|_| ApiError::not_found())
}

pub fn record_id(raw: &str) -> Result<RecordId, ApiError> {
    raw.parse().map(RecordId).map_err(|_| ApiError::not_found())
}

pub fn record_kind(raw: &str) -> Result<RecordKind, ApiError> {
    raw.parse().map_err(|_| ApiError::not_found())
}
