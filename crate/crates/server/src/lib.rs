//! HTTP service, CLI plumbing and data interchange for the glycotrack core.

pub mod auth;
pub mod cli;
pub mod config;
pub mod content;
pub mod csv_io;
pub mod error;
pub mod extract;
pub mod i18n;
pub mod routes;
pub mod seed;
pub mod wire;

use std::sync::Arc;

use axum::extract::{Request, State};
use axum::http::header::{ACCEPT_LANGUAGE, CONTENT_LENGTH, CONTENT_TYPE, WWW_AUTHENTICATE};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use chrono::Duration;
use glycotrack_core::clock::Clock;
use glycotrack_core::domain::Language;
use glycotrack_core::persistence::Store;

use crate::auth::Credentials;
use crate::content::ContentLibrary;
use crate::error::{ApiError, ErrorBody, PendingError};

/// Everything a handler needs. Cheap to clone.
#[derive(Clone)]
pub struct AppState {
    pub store: Arc<dyn Store>,
    pub clock: Arc<dyn Clock>,
    pub credentials: Arc<Credentials>,
    pub token_ttl: Duration,
    pub content: Arc<ContentLibrary>,
}

impl AppState {
    pub fn new(store: Arc<dyn Store>, clock: Arc<dyn Clock>, credentials: Credentials, token_ttl: Duration) -> Self {
        AppState {
            store,
            clock,
            credentials: Arc::new(credentials),
            token_ttl,
            content: Arc::new(ContentLibrary::bundled()),
        }
    }

    pub fn with_content(mut self, content: ContentLibrary) -> Self {
        self.content = Arc::new(content);
        self
    }
}

/// The full `/v1` application, with error localization applied to every
/// response including unknown routes.
pub fn app(state: AppState) -> Router {
    Router::new()
        .nest("/v1", routes::router())
        .fallback(|| async { ApiError::not_found() })
        .layer(middleware::from_fn_with_state(state.clone(), localize))
        .with_state(state)
}

/// Renders the error envelope for every non-2xx response, in the caller's
/// profile language, else the `Accept-Language` choice, else English.
async fn localize(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let token = auth::bearer_token(req.headers()).map(str::to_string);
    let accept = req
        .headers()
        .get(ACCEPT_LANGUAGE)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    let mut res = next.run(req).await;
    let status = res.status();
    if !(status.is_client_error() || status.is_server_error()) {
        return res;
    }
    let (code, details) = match res.extensions_mut().remove::<PendingError>() {
        Some(p) => (p.code, p.details),
        None => (ApiError::code_for_status(status), Vec::new()),
    };
    let language = token
        .and_then(|t| auth::authenticate(&state, &t).ok())
        .map(|(_, user)| user.language)
        .or_else(|| accept.as_deref().and_then(i18n::accept_language))
        .unwrap_or(Language::En);
    let body = ErrorBody {
        status: status.as_u16(),
        code,
        message: i18n::message(code, language),
        details: &details,
    };
    let mut out = (status, Json(&body)).into_response();
    for (name, value) in res.headers() {
        if name != CONTENT_TYPE && name != CONTENT_LENGTH {
            out.headers_mut().insert(name.clone(), value.clone());
        }
    }
    if status == StatusCode::UNAUTHORIZED {
        out.headers_mut()
            .insert(WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
    }
    out.headers_mut().insert(
        "content-language",
        HeaderValue::from_static(language.as_str()),
    );
    out
}
