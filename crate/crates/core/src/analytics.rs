//! Evolution series, summary statistics and the weekly diary grid.
//!
//! Everything here is a pure function over a snapshot of stored records.
//! [`PatientAnalytics`] wires the same functions to a [`Store`].

use chrono::{Datelike, Duration, FixedOffset, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::domain::{
    classify_between, classify_glucose, classify_pressure, BpClass, GlucoseClass, Intensity, Meal,
    MealRelation, Record, RecordKind, StoredRecord, TargetRanges, Timestamp, UserId,
};
use crate::error::{Error, Result};
use crate::persistence::Store;
use crate::units::{compute_bmi, GlucoseUnit};

/// Half-open time window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    start: Timestamp,
    end: Timestamp,
}

impl Window {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self> {
        if start >= end {
            return Err(Error::invalid(
                "window.inverted",
                format!("window start {start} must precede end {end}"),
            ));
        }
        Ok(Window { start, end })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: Timestamp,
    pub value: f64,
    pub classification: Option<GlucoseClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SeriesStats {
    pub count: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pct_below: Option<f64>,
    pub pct_in_range: Option<f64>,
    pub pct_above: Option<f64>,
}

/// count/mean/min/max over `values`; target percentages when a
/// `(low, high)` band in the same unit is supplied.
pub fn summarize(values: &[f64], band: Option<(f64, f64)>) -> SeriesStats {
    let classes: Option<Vec<GlucoseClass>> =
        band.map(|(lo, hi)| values.iter().map(|&v| classify_between(v, lo, hi)).collect());
    stats_with_classes(values, classes.as_deref())
}

fn stats_with_classes(values: &[f64], classes: Option<&[GlucoseClass]>) -> SeriesStats {
    let count = values.len();
    if count == 0 {
        return SeriesStats::default();
    }
    let sum: f64 = values.iter().sum();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Mean can drift an ulp outside [min, max] for near-constant inputs.
    let mean = (sum / count as f64).clamp(min, max);
    let mut stats = SeriesStats {
        count,
        mean: Some(mean),
        min: Some(min),
        max: Some(max),
        ..SeriesStats::default()
    };
    if let Some(classes) = classes {
        let pct = |class: GlucoseClass| {
            100.0 * classes.iter().filter(|&&c| c == class).count() as f64 / count as f64
        };
        stats.pct_below = Some(pct(GlucoseClass::Below));
        stats.pct_in_range = Some(pct(GlucoseClass::InRange));
        stats.pct_above = Some(pct(GlucoseClass::Above));
    }
    stats
}

/// Records of `patient` inside `window`, ascending by timestamp; equal
/// timestamps keep their input order.
fn in_window<'a>(
    records: &'a [StoredRecord],
    patient: UserId,
    window: &Window,
) -> Vec<&'a Record> {
    let mut selected: Vec<&Record> = records
        .iter()
        .map(|s| &s.record)
        .filter(|r| r.patient() == patient && window.contains(r.timestamp()))
        .collect();
    selected.sort_by_key(|r| r.timestamp());
    selected
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlucoseSeries {
    pub unit: GlucoseUnit,
    pub points: Vec<SeriesPoint>,
    pub stats: SeriesStats,
}

/// Glucose evolution in `unit`. Classification always happens on the
/// canonical mg/dL value so it cannot depend on the display unit.
pub fn glucose_series(
    records: &[StoredRecord],
    patient: UserId,
    window: &Window,
    unit: GlucoseUnit,
    targets: &TargetRanges,
) -> GlucoseSeries {
    let points: Vec<SeriesPoint> = in_window(records, patient, window)
        .into_iter()
        .filter_map(|r| match r {
            Record::Glucose(g) => Some(SeriesPoint {
                t: g.taken_at,
                value: unit.from_canonical(g.value_mg_dl),
                classification: Some(classify_glucose(g.value_mg_dl, targets)),
            }),
            _ => None,
        })
        .collect();
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let classes: Vec<GlucoseClass> = points.iter().filter_map(|p| p.classification).collect();
    let stats = stats_with_classes(&values, Some(&classes));
    GlucoseSeries {
        unit,
        points,
        stats,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPoint {
    pub t: Timestamp,
    pub value_kg: f64,
    pub bmi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSeries {
    pub points: Vec<WeightPoint>,
    pub stats: SeriesStats,
}

/// Weight evolution in kilograms with per-point BMI when a height is known.
pub fn weight_bmi_series(
    records: &[StoredRecord],
    patient: UserId,
    window: &Window,
    height_m: Option<f64>,
) -> WeightSeries {
    let points: Vec<WeightPoint> = in_window(records, patient, window)
        .into_iter()
        .filter_map(|r| match r {
            Record::Weight(w) => Some(WeightPoint {
                t: w.measured_at,
                value_kg: w.value_kg,
                bmi: height_m.and_then(|h| compute_bmi(w.value_kg, h).ok()),
            }),
            _ => None,
        })
        .collect();
    let values: Vec<f64> = points.iter().map(|p| p.value_kg).collect();
    WeightSeries {
        stats: summarize(&values, None),
        points,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpPoint {
    pub t: Timestamp,
    pub systolic: u16,
    pub diastolic: u16,
    pub classification: BpClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpSeries {
    pub points: Vec<BpPoint>,
    pub systolic: SeriesStats,
    pub diastolic: SeriesStats,
}

pub fn blood_pressure_series(
    records: &[StoredRecord],
    patient: UserId,
    window: &Window,
    targets: &TargetRanges,
) -> BpSeries {
    let points: Vec<BpPoint> = in_window(records, patient, window)
        .into_iter()
        .filter_map(|r| match r {
            Record::BloodPressure(bp) => Some(BpPoint {
                t: bp.measured_at,
                systolic: bp.systolic,
                diastolic: bp.diastolic,
                classification: classify_pressure(bp.systolic, bp.diastolic, targets),
            }),
            _ => None,
        })
        .collect();
    let sys: Vec<f64> = points.iter().map(|p| f64::from(p.systolic)).collect();
    let dia: Vec<f64> = points.iter().map(|p| f64::from(p.diastolic)).collect();
    BpSeries {
        systolic: summarize(&sys, None),
        diastolic: summarize(&dia, None),
        points,
    }
}

/// One meal of one day in the weekly grid. Glucose values are canonical
/// mg/dL averages; insulin and carbohydrates are sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MealCell {
    pub meal: Meal,
    pub glucose_before: Option<f64>,
    pub glucose_after: Option<f64>,
    pub insulin_units: Option<f64>,
    pub carbs_g: Option<f64>,
}

impl MealCell {
    fn empty(meal: Meal) -> Self {
        MealCell {
            meal,
            glucose_before: None,
            glucose_after: None,
            insulin_units: None,
            carbs_g: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.glucose_before.is_none()
            && self.glucose_after.is_none()
            && self.insulin_units.is_none()
            && self.carbs_g.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityEntry {
    pub performed_at: Timestamp,
    pub intensity: Intensity,
    pub duration_min: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaySummary {
    pub date: NaiveDate,
    /// Always four cells, in breakfast, lunch, snack, dinner order.
    pub cells: Vec<MealCell>,
    pub activities: Vec<ActivityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySummary {
    pub week_start: NaiveDate,
    pub tz_offset_min: i32,
    /// Always seven days starting on `week_start`.
    pub days: Vec<DaySummary>,
}

pub const MAX_TZ_OFFSET_MIN: i32 = 14 * 60;

pub fn local_offset(tz_offset_min: i32) -> Result<FixedOffset> {
    if tz_offset_min.abs() > MAX_TZ_OFFSET_MIN {
        return Err(Error::invalid(
            "week.offset_out_of_bounds",
            format!("UTC offset {tz_offset_min} min outside ±840 min"),
        ));
    }
    Ok(FixedOffset::east_opt(tz_offset_min * 60).expect("offset checked above"))
}

/// The UTC window covering the seven local days starting on `week_start`.
pub fn week_window(week_start: NaiveDate, tz_offset_min: i32) -> Result<Window> {
    if week_start.weekday() != Weekday::Mon {
        return Err(Error::invalid(
            "week.start_not_monday",
            format!("{week_start} is a {:?}, weeks start on Monday", week_start.weekday()),
        ));
    }
    local_offset(tz_offset_min)?;
    let local_midnight = week_start.and_hms_opt(0, 0, 0).expect("midnight exists");
    let start = local_midnight.and_utc() - Duration::minutes(i64::from(tz_offset_min));
    Window::new(start, start + Duration::days(7))
}

#[derive(Default)]
struct CellAccumulator {
    before: Vec<f64>,
    after: Vec<f64>,
    insulin: Option<f64>,
    carbs: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Day-by-meal grid for the week starting on `week_start` (a Monday), with
/// days cut in the local time given by `tz_offset_min`. Entries without a
/// meal slot are left out of the grid.
pub fn weekly_summary(
    records: &[StoredRecord],
    patient: UserId,
    week_start: NaiveDate,
    tz_offset_min: i32,
) -> Result<WeeklySummary> {
    let window = week_window(week_start, tz_offset_min)?;
    let offset = local_offset(tz_offset_min)?;
    let mut cells: Vec<[CellAccumulator; 4]> = (0..7).map(|_| Default::default()).collect();
    let mut activities: Vec<Vec<ActivityEntry>> = vec![Vec::new(); 7];

    for record in in_window(records, patient, &window) {
        let local_date = record.timestamp().with_timezone(&offset).date_naive();
        let day = (local_date - week_start).num_days();
        debug_assert!((0..7).contains(&day));
        let day = day as usize;

        if let Record::Activity(a) = record {
            activities[day].push(ActivityEntry {
                performed_at: a.performed_at,
                intensity: a.intensity,
                duration_min: a.duration_min,
            });
            continue;
        }
        let Some(slot) = record.slot() else { continue };
        let acc = &mut cells[day][slot.meal.index()];
        match record {
            Record::Glucose(g) => match slot.relation {
                MealRelation::Before => acc.before.push(g.value_mg_dl),
                MealRelation::After => acc.after.push(g.value_mg_dl),
            },
            Record::Insulin(i) => *acc.insulin.get_or_insert(0.0) += i.units,
            Record::Carbs(c) => *acc.carbs.get_or_insert(0.0) += c.grams,
            _ => {}
        }
    }

    let days = cells
        .into_iter()
        .zip(activities)
        .enumerate()
        .map(|(i, (accs, activities))| DaySummary {
            date: week_start + Duration::days(i as i64),
            cells: Meal::ALL
                .into_iter()
                .zip(accs)
                .map(|(meal, acc)| MealCell {
                    glucose_before: mean(&acc.before),
                    glucose_after: mean(&acc.after),
                    insulin_units: acc.insulin,
                    carbs_g: acc.carbs,
                    ..MealCell::empty(meal)
                })
                .collect(),
            activities,
        })
        .collect();

    Ok(WeeklySummary {
        week_start,
        tz_offset_min,
        days,
    })
}

/// Store-backed entry points: resolve the patient profile, pull the window
/// from storage, then delegate to the pure functions above.
pub struct PatientAnalytics<'a> {
    store: &'a dyn Store,
}

impl<'a> PatientAnalytics<'a> {
    pub fn new(store: &'a dyn Store) -> Self {
        PatientAnalytics { store }
    }

    fn patient_targets(&self, patient: UserId) -> Result<(TargetRanges, Option<f64>)> {
        let profile = self.store.user(patient)?;
        if !profile.is_patient() {
            return Err(Error::NotFound("patient"));
        }
        Ok((profile.targets.unwrap_or_default(), profile.height_m))
    }

    pub fn glucose_series(
        &self,
        patient: UserId,
        window: &Window,
        unit: GlucoseUnit,
    ) -> Result<(GlucoseSeries, TargetRanges)> {
        let (targets, _) = self.patient_targets(patient)?;
        let records = self.store.query_records(patient, &[RecordKind::Glucose], window)?;
        Ok((glucose_series(&records, patient, window, unit, &targets), targets))
    }

    pub fn weight_bmi_series(
        &self,
        patient: UserId,
        window: &Window,
    ) -> Result<(WeightSeries, Option<f64>)> {
        let (_, height) = self.patient_targets(patient)?;
        let records = self.store.query_records(patient, &[RecordKind::Weight], window)?;
        Ok((weight_bmi_series(&records, patient, window, height), height))
    }

    pub fn blood_pressure_series(
        &self,
        patient: UserId,
        window: &Window,
    ) -> Result<(BpSeries, TargetRanges)> {
        let (targets, _) = self.patient_targets(patient)?;
        let records = self
            .store
            .query_records(patient, &[RecordKind::BloodPressure], window)?;
        Ok((blood_pressure_series(&records, patient, window, &targets), targets))
    }

    pub fn weekly_summary(
        &self,
        patient: UserId,
        week_start: NaiveDate,
        tz_offset_min: i32,
    ) -> Result<WeeklySummary> {
        self.patient_targets(patient)?;
        let window = week_window(week_start, tz_offset_min)?;
        let records = self.store.query_records(
            patient,
            &[
                RecordKind::Glucose,
                RecordKind::Insulin,
                RecordKind::Carbs,
                RecordKind::Activity,
            ],
            &window,
        )?;
        weekly_summary(&records, patient, week_start, tz_offset_min)
    }
}
