mod account;
mod content;
mod records;
mod settings;
mod stats;
mod supervision;

use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use serde_json::json;

use crate::AppState;

pub fn router() -> Router<AppState> {
    Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/auth/register", post(account::register))
        .route("/auth/login", post(account::login))
        .route("/auth/logout", post(account::logout))
        .route("/me", get(account::me))
        .route("/me/settings", get(settings::get_settings))
        .route("/me/settings/targets", put(settings::put_targets))
        .route("/me/settings/units", put(settings::put_units))
        .route("/me/settings/language", put(settings::put_language))
        .route("/me/settings/height", put(settings::put_height))
        .route(
            "/me/supervisors",
            get(supervision::my_supervisors).post(supervision::add_supervisor),
        )
        .route("/me/supervisors/{supervisor_id}", delete(supervision::remove_supervisor))
        .route("/me/supervised", get(supervision::my_patients))
        .route("/me/supervised/{patient_id}", delete(supervision::drop_patient))
        .route("/supervisors", get(supervision::search))
        .route("/patients/{patient_id}/profile", get(supervision::patient_profile))
        .route(
            "/patients/{patient_id}/records/{kind}",
            get(records::list).post(records::create),
        )
        .route(
            "/patients/{patient_id}/records/{kind}/{record_id}",
            get(records::get_one).put(records::replace).delete(records::remove),
        )
        .route("/patients/{patient_id}/stats/glucose", get(stats::glucose))
        .route("/patients/{patient_id}/stats/weight", get(stats::weight))
        .route("/patients/{patient_id}/stats/blood_pressure", get(stats::blood_pressure))
        .route("/patients/{patient_id}/stats/weekly", get(stats::weekly))
        .route("/content/{document}", get(content::document))
}

/// Applies the supervision rule before any data is touched. An unknown
/// subject is indistinguishable from an unlinked one.
pub(crate) fn authorize(
    state: &AppState,
    caller: &crate::auth::Caller,
    subject: glycotrack_core::domain::UserId,
    action: glycotrack_core::supervision::Action,
) -> crate::error::ApiResult<()> {
    let actor = caller.profile.id;
    let linked = actor != subject && state.store.has_active_link(subject, actor)?;
    glycotrack_core::supervision::decide(actor, subject, action, linked).require()?;
    Ok(())
}
