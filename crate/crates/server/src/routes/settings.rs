use axum::extract::State;
use axum::Json;
use glycotrack_core::domain::{Language, UnitPrefs, UserProfile};
use glycotrack_core::units::{GlucoseUnit, WeightUnit};
use serde::{Deserialize, Serialize};

use crate::auth::Caller;
use crate::error::{ApiError, ApiResult};
use crate::extract::ApiJson;
use crate::wire::TargetsView;
use crate::AppState;

#[derive(Debug, Serialize)]
pub struct SettingsView {
    units: UnitPrefs,
    language: Language,
    height_m: Option<f64>,
    targets: Option<TargetsView>,
}

fn view(p: &UserProfile) -> Json<SettingsView> {
    Json(SettingsView {
        units: p.unit_prefs,
        language: p.language,
        height_m: p.height_m,
        targets: p.targets.as_ref().map(|t| TargetsView::new(t, p.unit_prefs.glucose)),
    })
}

fn save(state: &AppState, profile: UserProfile) -> ApiResult<Json<SettingsView>> {
    state.store.update_user(&profile)?;
    Ok(view(&profile))
}

fn patient_only(p: &UserProfile) -> ApiResult<()> {
    if p.is_patient() {
        Ok(())
    } else {
        Err(ApiError::forbidden("patient_only"))
    }
}

pub async fn get_settings(caller: Caller) -> Json<SettingsView> {
    view(&caller.profile)
}

/// Any omitted field keeps its current value. Glucose bounds are read in
/// `unit`, defaulting to the caller's preference.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsInput {
    glucose_low: Option<f64>,
    glucose_high: Option<f64>,
    unit: Option<GlucoseUnit>,
    bp_systolic_high: Option<u16>,
    bp_diastolic_high: Option<u16>,
}

pub async fn put_targets(
    State(state): State<AppState>,
    caller: Caller,
    ApiJson(input): ApiJson<TargetsInput>,
) -> ApiResult<Json<SettingsView>> {
    let mut profile = caller.profile;
    patient_only(&profile)?;
    let unit = input.unit.unwrap_or(profile.unit_prefs.glucose);
    let mut targets = profile.targets.unwrap_or_default();
    if let Some(v) = input.glucose_low {
        targets.glucose_low = unit.to_canonical(v);
    }
    if let Some(v) = input.glucose_high {
        targets.glucose_high = unit.to_canonical(v);
    }
    if let Some(v) = input.bp_systolic_high {
        targets.bp_sys_high = v;
    }
    if let Some(v) = input.bp_diastolic_high {
        targets.bp_dia_high = v;
    }
    targets.validate()?;
    profile.targets = Some(targets);
    save(&state, profile)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsInput {
    glucose: Option<GlucoseUnit>,
    weight: Option<WeightUnit>,
}

pub async fn put_units(
    State(state): State<AppState>,
    caller: Caller,
    ApiJson(input): ApiJson<UnitsInput>,
) -> ApiResult<Json<SettingsView>> {
    let mut profile = caller.profile;
    if let Some(g) = input.glucose {
        profile.unit_prefs.glucose = g;
    }
    if let Some(w) = input.weight {
        profile.unit_prefs.weight = w;
    }
    save(&state, profile)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageInput {
    language: Language,
}

pub async fn put_language(
    State(state): State<AppState>,
    caller: Caller,
    ApiJson(input): ApiJson<LanguageInput>,
) -> ApiResult<Json<SettingsView>> {
    let mut profile = caller.profile;
    profile.language = input.language;
    save(&state, profile)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightInput {
    height_m: Option<f64>,
}

pub async fn put_height(
    State(state): State<AppState>,
    caller: Caller,
    ApiJson(input): ApiJson<HeightInput>,
) -> ApiResult<Json<SettingsView>> {
    let mut profile = caller.profile;
    patient_only(&profile)?;
    profile.height_m = input.height_m;
    save(&state, profile)
}
