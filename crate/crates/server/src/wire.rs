//! JSON request and response shapes. Values cross the wire in the
//! requester's preferred units and always carry a unit tag.

use chrono::SubsecRound;
use glycotrack_core::analytics::{ActivityEntry, SeriesStats};
use glycotrack_core::domain::{
    BloodPressure, BodyWeight, CarbIntake, GlucoseReading, InsulinDose, Intensity, Language, Meal,
    MealRelation, MealSlot, MedicationRecord, PhysicalActivity, Record, RecordId, RecordKind, Role,
    StoredRecord, TargetRanges, Timestamp, UnitPrefs, UserId, UserProfile,
};
use glycotrack_core::supervision::{LinkStatus, SupervisionLink};
use glycotrack_core::units::{GlucoseUnit, WeightUnit};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

pub const PRESSURE_UNIT: &str = "mmHg";

#[derive(Debug, Clone, Serialize)]
pub struct TargetsView {
    pub glucose_low: f64,
    pub glucose_high: f64,
    pub glucose_unit: GlucoseUnit,
    pub bp_systolic_high: u16,
    pub bp_diastolic_high: u16,
    pub pressure_unit: &'static str,
}

impl TargetsView {
    pub fn new(t: &TargetRanges, unit: GlucoseUnit) -> Self {
        TargetsView {
            glucose_low: unit.from_canonical(t.glucose_low),
            glucose_high: unit.from_canonical(t.glucose_high),
            glucose_unit: unit,
            bp_systolic_high: t.bp_sys_high,
            bp_diastolic_high: t.bp_dia_high,
            pressure_unit: PRESSURE_UNIT,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileView {
    pub id: UserId,
    pub role: Role,
    pub display_name: String,
    pub email: String,
    pub height_m: Option<f64>,
    pub units: UnitPrefs,
    pub language: Language,
    pub targets: Option<TargetsView>,
}

impl ProfileView {
    /// `viewer_unit` is the glucose unit of whoever is looking.
    pub fn new(p: &UserProfile, viewer_unit: GlucoseUnit) -> Self {
        ProfileView {
            id: p.id,
            role: p.role,
            display_name: p.display_name.clone(),
            email: p.email.clone(),
            height_m: p.height_m,
            units: p.unit_prefs,
            language: p.language,
            targets: p.targets.as_ref().map(|t| TargetsView::new(t, viewer_unit)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordBody {
    Glucose {
        taken_at: Timestamp,
        value: f64,
        unit: GlucoseUnit,
        meal: Option<Meal>,
        relation: Option<MealRelation>,
    },
    Insulin {
        taken_at: Timestamp,
        units: f64,
        insulin_kind: String,
        meal: Option<Meal>,
        relation: Option<MealRelation>,
    },
    Carbs {
        taken_at: Timestamp,
        grams: f64,
        meal: Option<Meal>,
        relation: Option<MealRelation>,
    },
    Medication {
        taken_at: Timestamp,
        name: String,
        dose: String,
    },
    Activity {
        performed_at: Timestamp,
        intensity: Intensity,
        duration_min: u32,
    },
    Weight {
        measured_at: Timestamp,
        value: f64,
        unit: WeightUnit,
    },
    BloodPressure {
        measured_at: Timestamp,
        systolic: u16,
        diastolic: u16,
        unit: &'static str,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordView {
    pub id: RecordId,
    pub patient_id: UserId,
    #[serde(flatten)]
    pub body: RecordBody,
    pub note: Option<String>,
}

fn split(slot: Option<MealSlot>) -> (Option<Meal>, Option<MealRelation>) {
    (slot.map(|s| s.meal), slot.map(|s| s.relation))
}

impl RecordView {
    pub fn new(stored: &StoredRecord, units: UnitPrefs) -> Self {
        let r = &stored.record;
        let body = match r {
            Record::Glucose(g) => {
                let (meal, relation) = split(g.slot);
                RecordBody::Glucose {
                    taken_at: g.taken_at,
                    value: units.glucose.from_canonical(g.value_mg_dl),
                    unit: units.glucose,
                    meal,
                    relation,
                }
            }
            Record::Insulin(i) => {
                let (meal, relation) = split(i.slot);
                RecordBody::Insulin {
                    taken_at: i.taken_at,
                    units: i.units,
                    insulin_kind: i.insulin_kind.clone(),
                    meal,
                    relation,
                }
            }
            Record::Carbs(c) => {
                let (meal, relation) = split(c.slot);
                RecordBody::Carbs {
                    taken_at: c.taken_at,
                    grams: c.grams,
                    meal,
                    relation,
                }
            }
            Record::Medication(m) => RecordBody::Medication {
                taken_at: m.taken_at,
                name: m.name.clone(),
                dose: m.dose.clone(),
            },
            Record::Activity(a) => RecordBody::Activity {
                performed_at: a.performed_at,
                intensity: a.intensity,
                duration_min: a.duration_min,
            },
            Record::Weight(w) => RecordBody::Weight {
                measured_at: w.measured_at,
                value: units.weight.from_canonical(w.value_kg),
                unit: units.weight,
            },
            Record::BloodPressure(bp) => RecordBody::BloodPressure {
                measured_at: bp.measured_at,
                systolic: bp.systolic,
                diastolic: bp.diastolic,
                unit: PRESSURE_UNIT,
            },
        };
        RecordView {
            id: stored.id,
            patient_id: r.patient(),
            body,
            note: r.note().map(str::to_string),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlucoseInput {
    taken_at: Timestamp,
    value: f64,
    unit: Option<GlucoseUnit>,
    meal: Option<Meal>,
    relation: Option<MealRelation>,
    note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InsulinInput {
    taken_at: Timestamp,
    units: f64,
    #[serde(default)]
    insulin_kind: String,
    meal: Option<Meal>,
    relation: Option<MealRelation>,
    note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarbsInput {
    taken_at: Timestamp,
    grams: f64,
    meal: Option<Meal>,
    relation: Option<MealRelation>,
    note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MedicationInput {
    taken_at: Timestamp,
    name: String,
    #[serde(default)]
    dose: String,
    note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivityInput {
    performed_at: Timestamp,
    intensity: Intensity,
    duration_min: u32,
    note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightInput {
    measured_at: Timestamp,
    value: f64,
    unit: Option<WeightUnit>,
    note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BloodPressureInput {
    measured_at: Timestamp,
    systolic: u16,
    diastolic: u16,
    note: Option<String>,
}

fn decode<T: DeserializeOwned>(body: serde_json::Value) -> Result<T, ApiError> {
    serde_json::from_value(body).map_err(|e| ApiError::invalid_body(e.to_string()))
}

/// Whole seconds only; the wire may carry fractions.
fn secs(t: Timestamp) -> Timestamp {
    t.trunc_subsecs(0)
}

/// Blank notes mean "no note".
fn note(n: Option<String>) -> Option<String> {
    n.filter(|s| !s.trim().is_empty())
}

fn slot(meal: Option<Meal>, relation: Option<MealRelation>) -> Result<Option<MealSlot>, ApiError> {
    MealSlot::from_parts(meal, relation).map_err(ApiError::from)
}

/// Decodes a record of `kind` for `patient`, converting values given in
/// `prefs` (or an explicit unit field) to canonical units.
pub fn record_from_json(
    kind: RecordKind,
    patient: UserId,
    prefs: UnitPrefs,
    body: serde_json::Value,
) -> Result<Record, ApiError> {
    Ok(match kind {
        RecordKind::Glucose => {
            let i: GlucoseInput = decode(body)?;
            let unit = i.unit.unwrap_or(prefs.glucose);
            Record::Glucose(GlucoseReading {
                patient,
                value_mg_dl: unit.to_canonical(i.value),
                taken_at: secs(i.taken_at),
                slot: slot(i.meal, i.relation)?,
                note: note(i.note),
            })
        }
        RecordKind::Insulin => {
            let i: InsulinInput = decode(body)?;
            Record::Insulin(InsulinDose {
                patient,
                units: i.units,
                insulin_kind: i.insulin_kind.trim().to_string(),
                taken_at: secs(i.taken_at),
                slot: slot(i.meal, i.relation)?,
                note: note(i.note),
            })
        }
        RecordKind::Carbs => {
            let i: CarbsInput = decode(body)?;
            Record::Carbs(CarbIntake {
                patient,
                grams: i.grams,
                taken_at: secs(i.taken_at),
                slot: slot(i.meal, i.relation)?,
                note: note(i.note),
            })
        }
        RecordKind::Medication => {
            let i: MedicationInput = decode(body)?;
            Record::Medication(MedicationRecord {
                patient,
                name: i.name.trim().to_string(),
                dose: i.dose.trim().to_string(),
                taken_at: secs(i.taken_at),
                note: note(i.note),
            })
        }
        RecordKind::Activity => {
            let i: ActivityInput = decode(body)?;
            Record::Activity(PhysicalActivity {
                patient,
                intensity: i.intensity,
                duration_min: i.duration_min,
                performed_at: secs(i.performed_at),
                note: note(i.note),
            })
        }
        RecordKind::Weight => {
            let i: WeightInput = decode(body)?;
            let unit = i.unit.unwrap_or(prefs.weight);
            Record::Weight(BodyWeight {
                patient,
                value_kg: unit.to_canonical(i.value),
                measured_at: secs(i.measured_at),
                note: note(i.note),
            })
        }
        RecordKind::BloodPressure => {
            let i: BloodPressureInput = decode(body)?;
            Record::BloodPressure(BloodPressure {
                patient,
                systolic: i.systolic,
                diastolic: i.diastolic,
                measured_at: secs(i.measured_at),
                note: note(i.note),
            })
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkView {
    pub patient_id: UserId,
    pub supervisor_id: UserId,
    pub status: LinkStatus,
    pub created_at: Timestamp,
    pub revoked_at: Option<Timestamp>,
}

impl From<&SupervisionLink> for LinkView {
    fn from(l: &SupervisionLink) -> Self {
        LinkView {
            patient_id: l.patient,
            supervisor_id: l.supervisor,
            status: l.status,
            created_at: l.created_at,
            revoked_at: l.revoked_at,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowView {
    pub from: Timestamp,
    pub to: Timestamp,
}

/// Stats with every value passed through a linear unit conversion.
pub fn scale_stats(stats: &SeriesStats, f: impl Fn(f64) -> f64) -> SeriesStats {
    SeriesStats {
        mean: stats.mean.map(&f),
        min: stats.min.map(&f),
        max: stats.max.map(&f),
        ..stats.clone()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ActivityView {
    pub performed_at: Timestamp,
    pub intensity: Intensity,
    pub duration_min: u32,
}

impl From<&ActivityEntry> for ActivityView {
    fn from(a: &ActivityEntry) -> Self {
        ActivityView {
            performed_at: a.performed_at,
            intensity: a.intensity,
            duration_min: a.duration_min,
        }
    }
}
