use axum::extract::{Path, State};
use axum::Json;
use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc};
use glycotrack_core::analytics::{local_offset, PatientAnalytics, SeriesStats, Window};
use glycotrack_core::domain::{BpClass, GlucoseClass, Meal, Timestamp, UserId};
use glycotrack_core::supervision::Action;
use glycotrack_core::units::{GlucoseUnit, WeightUnit};
use serde::{Deserialize, Serialize};

use super::authorize;
use crate::auth::Caller;
use crate::error::ApiResult;
use crate::extract::{self, ApiQuery};
use crate::wire::{scale_stats, ActivityView, TargetsView, WindowView};
use crate::AppState;

pub const DEFAULT_STATS_DAYS: i64 = 30;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesQuery {
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
}

/// Default stats window: the last 30 days up to and including now.
fn stats_window(q: &SeriesQuery, now: Timestamp) -> ApiResult<Window> {
    let to = q.to.unwrap_or(now + Duration::seconds(1));
    let from = q.from.unwrap_or(to - Duration::days(DEFAULT_STATS_DAYS));
    Ok(Window::new(from, to)?)
}

fn subject(state: &AppState, caller: &Caller, raw: &str) -> ApiResult<UserId> {
    let patient = extract::user_id(raw)?;
    authorize(state, caller, patient, Action::Read)?;
    Ok(patient)
}

#[derive(Debug, Serialize)]
pub struct GlucosePointView {
    t: Timestamp,
    value: f64,
    classification: Option<GlucoseClass>,
}

#[derive(Debug, Serialize)]
pub struct GlucoseSeriesView {
    patient_id: UserId,
    window: WindowView,
    unit: GlucoseUnit,
    targets: TargetsView,
    points: Vec<GlucosePointView>,
    stats: SeriesStats,
}

pub async fn glucose(
    State(state): State<AppState>,
    caller: Caller,
    Path(patient): Path<String>,
    ApiQuery(q): ApiQuery<SeriesQuery>,
) -> ApiResult<Json<GlucoseSeriesView>> {
    let patient = subject(&state, &caller, &patient)?;
    let window = stats_window(&q, state.clock.now())?;
    let unit = caller.profile.unit_prefs.glucose;
    let (series, targets) = PatientAnalytics::new(state.store.as_ref()).glucose_series(patient, &window, unit)?;
    Ok(Json(GlucoseSeriesView {
        patient_id: patient,
        window: WindowView {
            from: window.start(),
            to: window.end(),
        },
        unit,
        targets: TargetsView::new(&targets, unit),
        points: series
            .points
            .into_iter()
            .map(|p| GlucosePointView {
                t: p.t,
                value: p.value,
                classification: p.classification,
            })
            .collect(),
        stats: series.stats,
    }))
}

#[derive(Debug, Serialize)]
pub struct WeightPointView {
    t: Timestamp,
    value: f64,
    bmi: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct WeightSeriesView {
    patient_id: UserId,
    window: WindowView,
    unit: WeightUnit,
    height_m: Option<f64>,
    points: Vec<WeightPointView>,
    stats: SeriesStats,
}

pub async fn weight(
    State(state): State<AppState>,
    caller: Caller,
    Path(patient): Path<String>,
    ApiQuery(q): ApiQuery<SeriesQuery>,
) -> ApiResult<Json<WeightSeriesView>> {
    let patient = subject(&state, &caller, &patient)?;
    let window = stats_window(&q, state.clock.now())?;
    let unit = caller.profile.unit_prefs.weight;
    let (series, height_m) = PatientAnalytics::new(state.store.as_ref()).weight_bmi_series(patient, &window)?;
    Ok(Json(WeightSeriesView {
        patient_id: patient,
        window: WindowView {
            from: window.start(),
            to: window.end(),
        },
        unit,
        height_m,
        points: series
            .points
            .into_iter()
            .map(|p| WeightPointView {
                t: p.t,
                value: unit.from_canonical(p.value_kg),
                bmi: p.bmi,
            })
            .collect(),
        stats: scale_stats(&series.stats, |kg| unit.from_canonical(kg)),
    }))
}

#[derive(Debug, Serialize)]
pub struct BpPointView {
    t: Timestamp,
    systolic: u16,
    diastolic: u16,
    classification: BpClass,
}

#[derive(Debug, Serialize)]
pub struct BpSeriesView {
    patient_id: UserId,
    window: WindowView,
    unit: &'static str,
    targets: TargetsView,
    points: Vec<BpPointView>,
    systolic: SeriesStats,
    diastolic: SeriesStats,
}

pub async fn blood_pressure(
    State(state): State<AppState>,
    caller: Caller,
    Path(patient): Path<String>,
    ApiQuery(q): ApiQuery<SeriesQuery>,
) -> ApiResult<Json<BpSeriesView>> {
    let patient = subject(&state, &caller, &patient)?;
    let window = stats_window(&q, state.clock.now())?;
    let (series, targets) = PatientAnalytics::new(state.store.as_ref()).blood_pressure_series(patient, &window)?;
    Ok(Json(BpSeriesView {
        patient_id: patient,
        window: WindowView {
            from: window.start(),
            to: window.end(),
        },
        unit: crate::wire::PRESSURE_UNIT,
        targets: TargetsView::new(&targets, caller.profile.unit_prefs.glucose),
        points: series
            .points
            .into_iter()
            .map(|p| BpPointView {
                t: p.t,
                systolic: p.systolic,
                diastolic: p.diastolic,
                classification: p.classification,
            })
            .collect(),
        systolic: series.systolic,
        diastolic: series.diastolic,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeekQuery {
    week_start: Option<NaiveDate>,
    #[serde(default)]
    tz_offset_min: i32,
}

#[derive(Debug, Serialize)]
pub struct CellView {
    meal: Meal,
    glucose_before: Option<f64>,
    glucose_after: Option<f64>,
    insulin_units: Option<f64>,
    carbs_g: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct DayView {
    date: NaiveDate,
    cells: Vec<CellView>,
    activities: Vec<ActivityView>,
}

#[derive(Debug, Serialize)]
pub struct WeeklyView {
    patient_id: UserId,
    week_start: NaiveDate,
    tz_offset_min: i32,
    glucose_unit: GlucoseUnit,
    targets: TargetsView,
    days: Vec<DayView>,
}

/// Monday of the local week containing `now`.
fn current_monday(now: Timestamp, tz_offset_min: i32) -> ApiResult<NaiveDate> {
    let local = now.with_timezone(&local_offset(tz_offset_min)?).date_naive();
    Ok(local - Duration::days(i64::from(local.weekday().num_days_from_monday())))
}

pub async fn weekly(
    State(state): State<AppState>,
    caller: Caller,
    Path(patient): Path<String>,
    ApiQuery(q): ApiQuery<WeekQuery>,
) -> ApiResult<Json<WeeklyView>> {
    let patient = subject(&state, &caller, &patient)?;
    let week_start = match q.week_start {
        Some(d) => d,
        None => current_monday(state.clock.now(), q.tz_offset_min)?,
    };
    let analytics = PatientAnalytics::new(state.store.as_ref());
    let summary = analytics.weekly_summary(patient, week_start, q.tz_offset_min)?;
    let targets = state.store.user(patient)?.targets.unwrap_or_default();
    let unit = caller.profile.unit_prefs.glucose;
    let days = summary
        .days
        .iter()
        .map(|d| DayView {
            date: d.date,
            cells: d
                .cells
                .iter()
                .map(|c| CellView {
                    meal: c.meal,
                    glucose_before: c.glucose_before.map(|v| unit.from_canonical(v)),
                    glucose_after: c.glucose_after.map(|v| unit.from_canonical(v)),
                    insulin_units: c.insulin_units,
                    carbs_g: c.carbs_g,
                })
                .collect(),
            activities: d.activities.iter().map(ActivityView::from).collect(),
        })
        .collect();
    Ok(Json(WeeklyView {
        patient_id: patient,
        week_start: summary.week_start,
        tz_offset_min: summary.tz_offset_min,
        glucose_unit: unit,
        targets: TargetsView::new(&targets, unit),
        days,
    }))
}
