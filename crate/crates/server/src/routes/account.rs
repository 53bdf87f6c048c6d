use axum::extract::State;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use glycotrack_core::domain::{Language, NewUser, Role, Timestamp, UnitPrefs};
use serde::{Deserialize, Serialize};

use crate::auth::{issue_session, Caller, MIN_PASSWORD_CHARS};
use crate::error::{ApiError, ApiResult};
use crate::extract::ApiJson;
use crate::wire::ProfileView;
use crate::AppState;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterInput {
    role: Role,
    display_name: String,
    email: String,
    password: String,
    #[serde(default)]
    language: Language,
    height_m: Option<f64>,
}

pub async fn register(
    State(state): State<AppState>,
    ApiJson(input): ApiJson<RegisterInput>,
) -> ApiResult<impl IntoResponse> {
    if input.password.chars().count() < MIN_PASSWORD_CHARS {
        return Err(ApiError::invalid(
            "password.too_short",
            format!("passwords need at least {MIN_PASSWORD_CHARS} characters"),
        ));
    }
    let profile = state.store.create_user(NewUser {
        role: input.role,
        display_name: input.display_name,
        email: input.email,
        height_m: input.height_m,
        unit_prefs: UnitPrefs::default(),
        language: input.language,
        credential_hash: state.credentials.hash(&input.password),
    })?;
    tracing::info!(user = %profile.id, role = profile.role.as_str(), "registered");
    Ok((
        StatusCode::CREATED,
        Json(ProfileView::new(&profile, profile.unit_prefs.glucose)),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoginInput {
    email: String,
    password: String,
}

#[derive(Debug, Serialize)]
pub struct LoginView {
    token: String,
    token_type: &'static str,
    expires_at: Timestamp,
    user: ProfileView,
}

pub async fn login(
    State(state): State<AppState>,
    ApiJson(input): ApiJson<LoginInput>,
) -> ApiResult<Json<LoginView>> {
    let failed = || ApiError::new(StatusCode::UNAUTHORIZED, "invalid_credentials");
    let Some(user) = state.store.user_by_email(&input.email)? else {
        state.credentials.verify_dummy(&input.password);
        return Err(failed());
    };
    if !state.credentials.verify(&input.password, &user.credential_hash) {
        return Err(failed());
    }
    let (token, session) = issue_session(state.store.as_ref(), &user, state.clock.now(), state.token_ttl)?;
    Ok(Json(LoginView {
        token,
        token_type: "Bearer",
        expires_at: session.expires_at,
        user: ProfileView::new(&user, user.unit_prefs.glucose),
    }))
}

pub async fn logout(State(state): State<AppState>, caller: Caller) -> ApiResult<StatusCode> {
    state.store.revoke_session(&caller.session.token_hash)?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn me(caller: Caller) -> Json<ProfileView> {
    let p = &caller.profile;
    Json(ProfileView::new(p, p.unit_prefs.glucose))
}
