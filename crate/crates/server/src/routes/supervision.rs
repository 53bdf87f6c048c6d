use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use glycotrack_core::domain::UserId;
use glycotrack_core::supervision::{Action, Supervision, UserSummary};
use serde::Deserialize;

use super::authorize;
use crate::auth::Caller;
use crate::error::ApiResult;
use crate::extract::{self, ApiJson, ApiQuery};
use crate::wire::{LinkView, ProfileView};
use crate::AppState;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchQuery {
    #[serde(default)]
    q: String,
}

pub async fn search(
    State(state): State<AppState>,
    _caller: Caller,
    ApiQuery(query): ApiQuery<SearchQuery>,
) -> ApiResult<Json<Vec<UserSummary>>> {
    Ok(Json(Supervision::new(state.store.as_ref()).search_supervisors(&query.q)?))
}

pub async fn my_supervisors(State(state): State<AppState>, caller: Caller) -> ApiResult<Json<Vec<UserSummary>>> {
    Ok(Json(Supervision::new(state.store.as_ref()).list_supervisors(caller.profile.id)?))
}

pub async fn my_patients(State(state): State<AppState>, caller: Caller) -> ApiResult<Json<Vec<UserSummary>>> {
    Ok(Json(Supervision::new(state.store.as_ref()).list_supervised(caller.profile.id)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssociateInput {
    supervisor_id: UserId,
}

pub async fn add_supervisor(
    State(state): State<AppState>,
    caller: Caller,
    ApiJson(input): ApiJson<AssociateInput>,
) -> ApiResult<impl IntoResponse> {
    let me = caller.profile.id;
    let link = Supervision::new(state.store.as_ref()).associate(me, me, input.supervisor_id, state.clock.now())?;
    Ok((StatusCode::CREATED, Json(LinkView::from(&link))))
}

pub async fn remove_supervisor(
    State(state): State<AppState>,
    caller: Caller,
    Path(supervisor): Path<String>,
) -> ApiResult<StatusCode> {
    let supervisor = extract::user_id(&supervisor)?;
    let me = caller.profile.id;
    Supervision::new(state.store.as_ref()).dissociate(me, me, supervisor, state.clock.now())?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn drop_patient(
    State(state): State<AppState>,
    caller: Caller,
    Path(patient): Path<String>,
) -> ApiResult<StatusCode> {
    let patient = extract::user_id(&patient)?;
    let me = caller.profile.id;
    Supervision::new(state.store.as_ref()).dissociate(me, patient, me, state.clock.now())?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn patient_profile(
    State(state): State<AppState>,
    caller: Caller,
    Path(patient): Path<String>,
) -> ApiResult<Json<ProfileView>> {
    let patient = extract::user_id(&patient)?;
    authorize(&state, &caller, patient, Action::Read)?;
    let profile = state.store.user(patient)?;
    Ok(Json(ProfileView::new(&profile, caller.profile.unit_prefs.glucose)))
}
