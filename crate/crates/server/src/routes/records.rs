use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use chrono::{DateTime, Duration, Utc};
use glycotrack_core::analytics::Window;
use glycotrack_core::domain::{validate_record, RecordKind, StoredRecord, Timestamp, UserId};
use glycotrack_core::supervision::Action;
use serde::Deserialize;

use super::authorize;
use crate::auth::Caller;
use crate::error::{ApiError, ApiResult};
use crate::extract::{self, ApiJson, ApiQuery};
use crate::wire::{record_from_json, RecordView};
use crate::AppState;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListQuery {
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
}

fn target(raw_patient: &str, raw_kind: &str) -> ApiResult<(UserId, RecordKind)> {
    Ok((extract::user_id(raw_patient)?, extract::record_kind(raw_kind)?))
}

/// The stored record, provided it belongs to `patient` and is of `kind`.
fn owned(state: &AppState, patient: UserId, kind: RecordKind, raw_id: &str) -> ApiResult<StoredRecord> {
    let id = extract::record_id(raw_id)?;
    let stored = state.store.get_record(id)?;
    if stored.record.patient() != patient || stored.record.kind() != kind {
        return Err(ApiError::not_found());
    }
    Ok(stored)
}

/// Default list window: everything up to and including the current second.
pub(super) fn list_window(from: Option<Timestamp>, to: Option<Timestamp>, now: Timestamp) -> ApiResult<Window> {
    let from = from.unwrap_or(DateTime::UNIX_EPOCH);
    let to = to.unwrap_or(now + Duration::seconds(1));
    Ok(Window::new(from, to)?)
}

pub async fn list(
    State(state): State<AppState>,
    caller: Caller,
    Path((patient, kind)): Path<(String, String)>,
    ApiQuery(q): ApiQuery<ListQuery>,
) -> ApiResult<Json<Vec<RecordView>>> {
    let (patient, kind) = target(&patient, &kind)?;
    authorize(&state, &caller, patient, Action::Read)?;
    let window = list_window(q.from, q.to, state.clock.now())?;
    let records = state.store.query_records(patient, &[kind], &window)?;
    let prefs = caller.profile.unit_prefs;
    Ok(Json(records.iter().map(|r| RecordView::new(r, prefs)).collect()))
}

pub async fn create(
    State(state): State<AppState>,
    caller: Caller,
    Path((patient, kind)): Path<(String, String)>,
    ApiJson(body): ApiJson<serde_json::Value>,
) -> ApiResult<impl IntoResponse> {
    let (patient, kind) = target(&patient, &kind)?;
    authorize(&state, &caller, patient, Action::Write)?;
    let record = record_from_json(kind, patient, caller.profile.unit_prefs, body)?;
    validate_record(&record, state.clock.now()).map_err(ApiError::validation)?;
    let stored = state.store.put_record(record)?;
    Ok((StatusCode::CREATED, Json(RecordView::new(&stored, caller.profile.unit_prefs))))
}

pub async fn get_one(
    State(state): State<AppState>,
    caller: Caller,
    Path((patient, kind, id)): Path<(String, String, String)>,
) -> ApiResult<Json<RecordView>> {
    let (patient, kind) = target(&patient, &kind)?;
    authorize(&state, &caller, patient, Action::Read)?;
    let stored = owned(&state, patient, kind, &id)?;
    Ok(Json(RecordView::new(&stored, caller.profile.unit_prefs)))
}

pub async fn replace(
    State(state): State<AppState>,
    caller: Caller,
    Path((patient, kind, id)): Path<(String, String, String)>,
    ApiJson(body): ApiJson<serde_json::Value>,
) -> ApiResult<Json<RecordView>> {
    let (patient, kind) = target(&patient, &kind)?;
    authorize(&state, &caller, patient, Action::Write)?;
    let existing = owned(&state, patient, kind, &id)?;
    let record = record_from_json(kind, patient, caller.profile.unit_prefs, body)?;
    validate_record(&record, state.clock.now()).map_err(ApiError::validation)?;
    let stored = state.store.update_record(existing.id, record)?;
    Ok(Json(RecordView::new(&stored, caller.profile.unit_prefs)))
}

pub async fn remove(
    State(state): State<AppState>,
    caller: Caller,
    Path((patient, kind, id)): Path<(String, String, String)>,
) -> ApiResult<StatusCode> {
    let (patient, kind) = target(&patient, &kind)?;
    authorize(&state, &caller, patient, Action::Write)?;
    let existing = owned(&state, patient, kind, &id)?;
    state.store.delete_record(existing.id)?;
    Ok(StatusCode::NO_CONTENT)
}
