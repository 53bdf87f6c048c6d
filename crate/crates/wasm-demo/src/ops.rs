use chrono::{DateTime, Duration, NaiveDate, Utc};
use glycotrack_core::analytics::{glucose_series, weekly_summary, SeriesStats, Window};
use glycotrack_core::domain::{
    CarbIntake, GlucoseClass, GlucoseReading, InsulinDose, Intensity, Meal, MealRelation, MealSlot,
    PhysicalActivity, Record, RecordId, StoredRecord, TargetRanges, UserId,
};
use glycotrack_core::units::{compute_bmi, convert_glucose, convert_weight, GlucoseUnit, WeightUnit};
use serde::Serialize;

const PATIENT: UserId = UserId(1);

pub fn convert(value: f64, from: &str, to: &str) -> Result<f64, String> {
    if let (Ok(f), Ok(t)) = (from.parse::<GlucoseUnit>(), to.parse::<GlucoseUnit>()) {
        return convert_glucose(value, f, t).map_err(|e| e.to_string());
    }
    if let (Ok(f), Ok(t)) = (from.parse::<WeightUnit>(), to.parse::<WeightUnit>()) {
        return convert_weight(value, f, t).map_err(|e| e.to_string());
    }
    Err(format!("cannot convert {from} to {to}"))
}

pub fn bmi(weight: f64, unit: &str, height_m: f64) -> Result<f64, String> {
    let kg = convert(weight, unit, "kg")?;
    compute_bmi(kg, height_m).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct StatsReport {
    pub unit: GlucoseUnit,
    pub stats: SeriesStats,
    pub classes: Vec<GlucoseClass>,
}

/// Readings separated by commas, spaces or newlines, in `unit`; the band
/// `[low, high]` is in the same unit.
pub fn glucose_stats(values: &str, unit: &str, low: f64, high: f64) -> Result<StatsReport, String> {
    let unit: GlucoseUnit = unit.parse().map_err(|e: glycotrack_core::Error| e.to_string())?;
    let targets = TargetRanges {
        glucose_low: unit.to_canonical(low),
        glucose_high: unit.to_canonical(high),
        ..TargetRanges::default()
    };
    let problems = targets.violations();
    if !problems.is_empty() {
        return Err(problems.iter().map(|v| v.message.clone()).collect::<Vec<_>>().join("; "));
    }
    let start = epoch();
    let mut records = Vec::new();
    for (i, token) in values.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).enumerate() {
        let v: f64 = token.parse().map_err(|_| format!("'{token}' is not a number"))?;
        let record = Record::Glucose(GlucoseReading {
            patient: PATIENT,
            value_mg_dl: unit.to_canonical(v),
            taken_at: start + Duration::minutes(i as i64),
            slot: None,
            note: None,
        });
        records.push(checked(record, i + 1, token)?);
    }
    let window = Window::new(start, start + Duration::days(365)).expect("non-empty window");
    let series = glucose_series(&records, PATIENT, &window, unit, &targets);
    Ok(StatsReport {
        unit,
        classes: series.points.iter().filter_map(|p| p.classification).collect(),
        stats: series.stats,
    })
}

fn epoch() -> DateTime<Utc> {
    DateTime::from_timestamp(1_735_689_600, 0).expect("valid instant")
}

fn checked(record: Record, n: usize, what: &str) -> Result<StoredRecord, String> {
    let problems = record.violations();
    if let Some(v) = problems.first() {
        return Err(format!("{what}: {}", v.message));
    }
    Ok(StoredRecord { id: RecordId(n as u64), record })
}

#[derive(Debug, Serialize, PartialEq)]
pub struct GridCell {
    pub meal: Meal,
    pub glucose_before: Option<f64>,
    pub glucose_after: Option<f64>,
    pub insulin_units: Option<f64>,
    pub carbs_g: Option<f64>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct GridDay {
    pub date: NaiveDate,
    pub cells: Vec<GridCell>,
    pub activity_min: u32,
}

#[derive(Debug, Serialize)]
pub struct Grid {
    pub unit: GlucoseUnit,
    pub days: Vec<GridDay>,
}

/// Parses one diary line:
///
/// ```text
/// 2025-03-03T07:30Z glucose 112 breakfast before
/// 2025-03-03T07:35Z insulin 6 breakfast before
/// 2025-03-03T08:00Z carbs 45 breakfast after
/// 2025-03-03T18:00Z activity 40
/// ```
///
/// Glucose values are mg/dL. Times are UTC.
fn diary_line(line: &str) -> Result<Record, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 3 {
        return Err("expected: <time> <kind> <value> [meal relation]".into());
    }
    let at = DateTime::parse_from_rfc3339(&fields[0].replace('Z', ":00Z"))
        .or_else(|_| DateTime::parse_from_rfc3339(fields[0]))
        .map_err(|_| format!("bad time '{}'", fields[0]))?
        .with_timezone(&Utc);
    let value: f64 = fields[2].parse().map_err(|_| format!("bad value '{}'", fields[2]))?;
    let slot = match &fields[3..] {
        [] => None,
        [meal, relation] => {
            let meal: Meal = meal.parse().map_err(|e: glycotrack_core::Error| e.to_string())?;
            let relation: MealRelation = relation.parse().map_err(|e: glycotrack_core::Error| e.to_string())?;
            Some(MealSlot::new(meal, relation))
        }
        _ => return Err("a meal needs a relation (before/after)".into()),
    };
    Ok(match fields[1] {
        "glucose" => Record::Glucose(GlucoseReading {
            patient: PATIENT,
            value_mg_dl: value,
            taken_at: at,
            slot,
            note: None,
        }),
        "insulin" => Record::Insulin(InsulinDose {
            patient: PATIENT,
            units: value,
            insulin_kind: "rapid".into(),
            taken_at: at,
            slot,
            note: None,
        }),
        "carbs" => Record::Carbs(CarbIntake {
            patient: PATIENT,
            grams: value,
            taken_at: at,
            slot,
            note: None,
        }),
        "activity" => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(format!("activity minutes must be a whole number, got {value}"));
            }
            Record::Activity(PhysicalActivity {
                patient: PATIENT,
                intensity: Intensity::Moderate,
                duration_min: value as u32,
                performed_at: at,
                note: None,
            })
        }
        other => return Err(format!("unknown kind '{other}'")),
    })
}

pub fn weekly_grid(diary: &str, week_start: &str, tz_offset_min: i32, unit: &str) -> Result<Grid, String> {
    let unit: GlucoseUnit = unit.parse().map_err(|e: glycotrack_core::Error| e.to_string())?;
    let week_start: NaiveDate = week_start.parse().map_err(|_| format!("bad date '{week_start}'"))?;
    let mut records = Vec::new();
    for (i, line) in diary.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let record = diary_line(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        records.push(checked(record, records.len() + 1, &format!("line {}", i + 1))?);
    }
    let week = weekly_summary(&records, PATIENT, week_start, tz_offset_min).map_err(|e| e.to_string())?;
    let shown = |v: Option<f64>| v.map(|x| unit.from_canonical(x));
    Ok(Grid {
        unit,
        days: week
            .days
            .into_iter()
            .map(|d| GridDay {
                date: d.date,
                activity_min: d.activities.iter().map(|a| a.duration_min).sum(),
                cells: d
                    .cells
                    .into_iter()
                    .map(|c| GridCell {
                        meal: c.meal,
                        glucose_before: shown(c.glucose_before),
                        glucose_after: shown(c.glucose_after),
                        insulin_units: c.insulin_units,
                        carbs_g: c.carbs_g,
                    })
                    .collect(),
            })
            .collect(),
    })
}
