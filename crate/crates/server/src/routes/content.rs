use axum::extract::{Path, State};
use axum::http::header::ACCEPT_LANGUAGE;
use axum::http::HeaderMap;
use axum::Json;
use glycotrack_core::domain::Language;
use serde::Deserialize;

use crate::content::{Document, DocumentKind};
use crate::error::{ApiError, ApiResult};
use crate::extract::ApiQuery;
use crate::i18n::accept_language;
use crate::AppState;

#[derive(Debug, Deserialize)]
pub struct ContentQuery {
    lang: Option<String>,
}

/// Public. Language comes from `?lang=`, then `Accept-Language`; anything
/// unsupported falls back to English.
pub async fn document(
    State(state): State<AppState>,
    Path(name): Path<String>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<ContentQuery>,
) -> ApiResult<Json<Document>> {
    let kind = DocumentKind::from_name(&name).ok_or_else(ApiError::not_found)?;
    let lang = match q.lang {
        Some(tag) => Language::from_tag(&tag).unwrap_or(Language::En),
        None => headers
            .get(ACCEPT_LANGUAGE)
            .and_then(|v| v.to_str().ok())
            .and_then(accept_language)
            .unwrap_or(Language::En),
    };
    Ok(Json(state.content.get(kind, lang).clone()))
}
