//! Clinical record types, user profiles and their invariants.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::units::{GlucoseUnit, WeightUnit, HEIGHT_M_BOUNDS, WEIGHT_KG_BOUNDS};

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub u64);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub const GLUCOSE_MG_DL_BOUNDS: (f64, f64) = (10.0, 1000.0);
pub const SYSTOLIC_BOUNDS: (u16, u16) = (40, 300);
pub const DIASTOLIC_BOUNDS: (u16, u16) = (20, 200);
pub const MAX_INSULIN_UNITS: f64 = 200.0;
pub const MAX_CARBS_G: f64 = 1000.0;
pub const MAX_ACTIVITY_MIN: u32 = 1440;
pub const MAX_NOTE_CHARS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Meal {
    Breakfast,
    Lunch,
    Snack,
    Dinner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MealRelation {
    Before,
    After,
}

/// When in the day a glucose, insulin or carbohydrate entry was taken.
///
/// Records hold `Option<MealSlot>`; `None` is the explicit "unspecified"
/// marker, so a relation can never appear without its meal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MealSlot {
    pub meal: Meal,
    pub relation: MealRelation,
}

impl Meal {
    pub const ALL: [Meal; 4] = [Meal::Breakfast, Meal::Lunch, Meal::Snack, Meal::Dinner];

    pub fn as_str(self) -> &'static str {
        match self {
            Meal::Breakfast => "breakfast",
            Meal::Lunch => "lunch",
            Meal::Snack => "snack",
            Meal::Dinner => "dinner",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl MealRelation {
    pub fn as_str(self) -> &'static str {
        match self {
            MealRelation::Before => "before",
            MealRelation::After => "after",
        }
    }
}

impl FromStr for Meal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "breakfast" => Ok(Meal::Breakfast),
            "lunch" => Ok(Meal::Lunch),
            "snack" => Ok(Meal::Snack),
            "dinner" => Ok(Meal::Dinner),
            other => Err(Error::invalid("slot.unknown_meal", format!("unknown meal '{other}'"))),
        }
    }
}

impl FromStr for MealRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before" => Ok(MealRelation::Before),
            "after" => Ok(MealRelation::After),
            other => Err(Error::invalid(
                "slot.unknown_relation",
                format!("unknown meal relation '{other}'"),
            )),
        }
    }
}

impl MealSlot {
    pub fn new(meal: Meal, relation: MealRelation) -> Self {
        MealSlot { meal, relation }
    }

    /// Builds a slot from its two optional wire halves. Both present gives a
    /// slot, both absent gives `None`; anything else is incomplete.
    pub fn from_parts(meal: Option<Meal>, relation: Option<MealRelation>) -> Result<Option<Self>> {
        match (meal, relation) {
            (Some(meal), Some(relation)) => Ok(Some(MealSlot { meal, relation })),
            (None, None) => Ok(None),
            (None, Some(_)) => Err(Error::invalid(
                "slot.relation_without_meal",
                "a before/after relation requires a meal",
            )),
            (Some(_), None) => Err(Error::invalid(
                "slot.meal_without_relation",
                "a meal requires a before/after relation",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    Low,
    Moderate,
    High,
}

impl Intensity {
    pub fn as_str(self) -> &'static str {
        match self {
            Intensity::Low => "low",
            Intensity::Moderate => "moderate",
            Intensity::High => "high",
        }
    }
}

impl FromStr for Intensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Intensity::Low),
            "moderate" => Ok(Intensity::Moderate),
            "high" => Ok(Intensity::High),
            other => Err(Error::invalid(
                "activity.unknown_intensity",
                format!("unknown intensity '{other}'"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlucoseReading {
    pub patient: UserId,
    /// Canonical mg/dL.
    pub value_mg_dl: f64,
    pub taken_at: Timestamp,
    pub slot: Option<MealSlot>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsulinDose {
    pub patient: UserId,
    pub units: f64,
    pub insulin_kind: String,
    pub taken_at: Timestamp,
    pub slot: Option<MealSlot>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbIntake {
    pub patient: UserId,
    pub grams: f64,
    pub taken_at: Timestamp,
    pub slot: Option<MealSlot>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedicationRecord {
    pub patient: UserId,
    pub name: String,
    pub dose: String,
    pub taken_at: Timestamp,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalActivity {
    pub patient: UserId,
    pub intensity: Intensity,
    pub duration_min: u32,
    pub performed_at: Timestamp,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyWeight {
    pub patient: UserId,
    /// Canonical kilograms.
    pub value_kg: f64,
    pub measured_at: Timestamp,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BloodPressure {
    pub patient: UserId,
    pub systolic: u16,
    pub diastolic: u16,
    pub measured_at: Timestamp,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Glucose,
    Insulin,
    Carbs,
    Medication,
    Activity,
    Weight,
    BloodPressure,
}

impl RecordKind {
    pub const ALL: [RecordKind; 7] = [
        RecordKind::Glucose,
        RecordKind::Insulin,
        RecordKind::Carbs,
        RecordKind::Medication,
        RecordKind::Activity,
        RecordKind::Weight,
        RecordKind::BloodPressure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Glucose => "glucose",
            RecordKind::Insulin => "insulin",
            RecordKind::Carbs => "carbs",
            RecordKind::Medication => "medication",
            RecordKind::Activity => "activity",
            RecordKind::Weight => "weight",
            RecordKind::BloodPressure => "blood_pressure",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RecordKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid("record.unknown_kind", format!("unknown record kind '{s}'")))
    }
}

/// Any clinical entry a patient can record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Glucose(GlucoseReading),
    Insulin(InsulinDose),
    Carbs(CarbIntake),
    Medication(MedicationRecord),
    Activity(PhysicalActivity),
    Weight(BodyWeight),
    BloodPressure(BloodPressure),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::Glucose(_) => RecordKind::Glucose,
            Record::Insulin(_) => RecordKind::Insulin,
            Record::Carbs(_) => RecordKind::Carbs,
            Record::Medication(_) => RecordKind::Medication,
            Record::Activity(_) => RecordKind::Activity,
            Record::Weight(_) => RecordKind::Weight,
            Record::BloodPressure(_) => RecordKind::BloodPressure,
        }
    }

    pub fn patient(&self) -> UserId {
        match self {
            Record::Glucose(r) => r.patient,
            Record::Insulin(r) => r.patient,
            Record::Carbs(r) => r.patient,
            Record::Medication(r) => r.patient,
            Record::Activity(r) => r.patient,
            Record::Weight(r) => r.patient,
            Record::BloodPressure(r) => r.patient,
        }
    }

    pub fn set_patient(&mut self, patient: UserId) {
        match self {
            Record::Glucose(r) => r.patient = patient,
            Record::Insulin(r) => r.patient = patient,
            Record::Carbs(r) => r.patient = patient,
            Record::Medication(r) => r.patient = patient,
            Record::Activity(r) => r.patient = patient,
            Record::Weight(r) => r.patient = patient,
            Record::BloodPressure(r) => r.patient = patient,
        }
    }

    /// The moment the entry refers to (taken, performed or measured).
    pub fn timestamp(&self) -> Timestamp {
        match self {
            Record::Glucose(r) => r.taken_at,
            Record::Insulin(r) => r.taken_at,
            Record::Carbs(r) => r.taken_at,
            Record::Medication(r) => r.taken_at,
            Record::Activity(r) => r.performed_at,
            Record::Weight(r) => r.measured_at,
            Record::BloodPressure(r) => r.measured_at,
        }
    }

    pub fn note(&self) -> Option<&str> {
        match self {
            Record::Glucose(r) => r.note.as_deref(),
            Record::Insulin(r) => r.note.as_deref(),
            Record::Carbs(r) => r.note.as_deref(),
            Record::Medication(r) => r.note.as_deref(),
            Record::Activity(r) => r.note.as_deref(),
            Record::Weight(r) => r.note.as_deref(),
            Record::BloodPressure(r) => r.note.as_deref(),
        }
    }

    pub fn slot(&self) -> Option<MealSlot> {
        match self {
            Record::Glucose(r) => r.slot,
            Record::Insulin(r) => r.slot,
            Record::Carbs(r) => r.slot,
            _ => None,
        }
    }

    /// Every intrinsic invariant this record breaks. Empty means valid.
    ///
    /// The "not in the future" rule depends on a clock and is checked by
    /// [`validate_record`] instead.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            Record::Glucose(r) => {
                if !in_range(r.value_mg_dl, GLUCOSE_MG_DL_BOUNDS) {
                    out.push(Violation::new(
                        "glucose.out_of_bounds",
                        format!("glucose {} mg/dL outside 10-1000 mg/dL", r.value_mg_dl),
                    ));
                }
            }
            Record::Insulin(r) => {
                if !(r.units > 0.0 && r.units <= MAX_INSULIN_UNITS) {
                    out.push(Violation::new(
                        "insulin.units_out_of_bounds",
                        format!("insulin {} U outside (0, 200] U", r.units),
                    ));
                }
                check_text(&mut out, &r.insulin_kind, 0, 100, "insulin.kind_too_long", "insulin.kind_too_long");
            }
            Record::Carbs(r) => {
                if !(r.grams > 0.0 && r.grams <= MAX_CARBS_G) {
                    out.push(Violation::new(
                        "carbs.out_of_bounds",
                        format!("carbohydrates {} g outside (0, 1000] g", r.grams),
                    ));
                }
            }
            Record::Medication(r) => {
                check_text(&mut out, &r.name, 1, 200, "medication.name_empty", "medication.name_too_long");
                check_text(&mut out, &r.dose, 0, 100, "medication.dose_too_long", "medication.dose_too_long");
            }
            Record::Activity(r) => {
                if !(1..=MAX_ACTIVITY_MIN).contains(&r.duration_min) {
                    out.push(Violation::new(
                        "activity.duration_out_of_bounds",
                        format!("duration {} min outside 1-1440 min", r.duration_min),
                    ));
                }
            }
            Record::Weight(r) => {
                if !in_range(r.value_kg, WEIGHT_KG_BOUNDS) {
                    out.push(Violation::new(
                        "weight.out_of_bounds",
                        format!("weight {} kg outside 1-500 kg", r.value_kg),
                    ));
                }
            }
            Record::BloodPressure(r) => {
                if !(SYSTOLIC_BOUNDS.0..=SYSTOLIC_BOUNDS.1).contains(&r.systolic) {
                    out.push(Violation::new(
                        "bp.systolic_out_of_bounds",
                        format!("systolic {} mmHg outside 40-300 mmHg", r.systolic),
                    ));
                }
                if !(DIASTOLIC_BOUNDS.0..=DIASTOLIC_BOUNDS.1).contains(&r.diastolic) {
                    out.push(Violation::new(
                        "bp.diastolic_out_of_bounds",
                        format!("diastolic {} mmHg outside 20-200 mmHg", r.diastolic),
                    ));
                }
                if r.systolic <= r.diastolic {
                    out.push(Violation::new(
                        "bp.systolic_not_greater",
                        format!("systolic {} must exceed diastolic {}", r.systolic, r.diastolic),
                    ));
                }
            }
        }
        if let Some(note) = self.note() {
            if note.is_empty() {
                out.push(Violation::new("note.empty", "an empty note must be omitted"));
            } else if note.chars().count() > MAX_NOTE_CHARS {
                out.push(Violation::new("note.too_long", "note exceeds 500 characters"));
            }
        }
        if self.timestamp().nanosecond() != 0 {
            out.push(Violation::new(
                "timestamp.subsecond",
                "timestamps carry whole seconds only",
            ));
        }
        out
    }
}

fn in_range(value: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&value)
}

fn check_text(
    out: &mut Vec<Violation>,
    text: &str,
    min: usize,
    max: usize,
    short_code: &'static str,
    long_code: &'static str,
) {
    let len = text.chars().count();
    if min > 0 && text.trim().is_empty() {
        out.push(Violation::new(short_code, "text must not be empty"));
    } else if len > max {
        out.push(Violation::new(long_code, format!("text exceeds {max} characters")));
    }
}

/// Full validation at creation time: intrinsic invariants plus the rule
/// that an entry cannot be dated after `now`.
pub fn validate_record(record: &Record, now: Timestamp) -> Result<(), Vec<Violation>> {
    let mut violations = record.violations();
    if record.timestamp() > now {
        violations.push(Violation::new(
            "timestamp.in_future",
            "entries cannot be dated in the future",
        ));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// A record as held by the store, with its assigned identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub id: RecordId,
    pub record: Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlucoseClass {
    Below,
    InRange,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpClass {
    InRange,
    Elevated,
}

/// Personal goal bounds. Glucose bounds are canonical mg/dL and inclusive;
/// blood-pressure thresholds are inclusive upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRanges {
    pub glucose_low: f64,
    pub glucose_high: f64,
    pub bp_sys_high: u16,
    pub bp_dia_high: u16,
}

impl Default for TargetRanges {
    fn default() -> Self {
        TargetRanges {
            glucose_low: 70.0,
            glucose_high: 180.0,
            bp_sys_high: 130,
            bp_dia_high: 80,
        }
    }
}

impl TargetRanges {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !in_range(self.glucose_low, GLUCOSE_MG_DL_BOUNDS) || !in_range(self.glucose_high, GLUCOSE_MG_DL_BOUNDS) {
            out.push(Violation::new(
                "targets.glucose_out_of_bounds",
                "glucose targets must lie within 10-1000 mg/dL",
            ));
        }
        // Negated so NaN bounds are rejected as well.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.glucose_low < self.glucose_high) {
            out.push(Violation::new(
                "targets.glucose_low_not_below_high",
                "the lower glucose target must be below the upper one",
            ));
        }
        if !(SYSTOLIC_BOUNDS.0..=SYSTOLIC_BOUNDS.1).contains(&self.bp_sys_high) {
            out.push(Violation::new(
                "targets.bp_systolic_out_of_bounds",
                "systolic threshold must lie within 40-300 mmHg",
            ));
        }
        if !(DIASTOLIC_BOUNDS.0..=DIASTOLIC_BOUNDS.1).contains(&self.bp_dia_high) {
            out.push(Violation::new(
                "targets.bp_diastolic_out_of_bounds",
                "diastolic threshold must lie within 20-200 mmHg",
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Bounds are in range: `low <= value <= high`.
pub fn classify_glucose(value_mg_dl: f64, targets: &TargetRanges) -> GlucoseClass {
    classify_between(value_mg_dl, targets.glucose_low, targets.glucose_high)
}

pub(crate) fn classify_between(value: f64, low: f64, high: f64) -> GlucoseClass {
    if value < low {
        GlucoseClass::Below
    } else if value > high {
        GlucoseClass::Above
    } else {
        GlucoseClass::InRange
    }
}

pub fn classify_blood_pressure(bp: &BloodPressure, targets: &TargetRanges) -> BpClass {
    classify_pressure(bp.systolic, bp.diastolic, targets)
}

pub fn classify_pressure(systolic: u16, diastolic: u16, targets: &TargetRanges) -> BpClass {
    if systolic > targets.bp_sys_high || diastolic > targets.bp_dia_high {
        BpClass::Elevated
    } else {
        BpClass::InRange
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Patient,
    Supervisor,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Patient => "patient",
            Role::Supervisor => "supervisor",
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patient" => Ok(Role::Patient),
            "supervisor" => Ok(Role::Supervisor),
            other => Err(Error::invalid("profile.unknown_role", format!("unknown role '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    #[default]
    En,
    Es,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
        }
    }

    /// Lenient parse of a language tag such as `es-AR`; `None` when unsupported.
    pub fn from_tag(tag: &str) -> Option<Language> {
        let primary = tag.trim().split(['-', '_']).next()?.to_ascii_lowercase();
        match primary.as_str() {
            "en" => Some(Language::En),
            "es" => Some(Language::Es),
            _ => None,
        }
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en" => Ok(Language::En),
            "es" => Ok(Language::Es),
            other => Err(Error::invalid(
                "profile.unknown_language",
                format!("unsupported language '{other}'"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct UnitPrefs {
    pub glucose: GlucoseUnit,
    pub weight: WeightUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: UserId,
    pub role: Role,
    pub display_name: String,
    /// Lowercase, trimmed; unique across the system.
    pub email: String,
    /// Patients only.
    pub height_m: Option<f64>,
    pub unit_prefs: UnitPrefs,
    pub language: Language,
    /// Present for patients, absent for supervisors.
    pub targets: Option<TargetRanges>,
    /// Opaque salted hash; never a plaintext password.
    pub credential_hash: String,
}

/// Registration input; the store assigns the id.
#[derive(Debug, Clone, PartialEq)]
pub struct NewUser {
    pub role: Role,
    pub display_name: String,
    pub email: String,
    pub height_m: Option<f64>,
    pub unit_prefs: UnitPrefs,
    pub language: Language,
    pub credential_hash: String,
}

impl NewUser {
    /// Normalizes the email and fills role-dependent defaults.
    pub fn into_profile(self, id: UserId) -> UserProfile {
        let targets = match self.role {
            Role::Patient => Some(TargetRanges::default()),
            Role::Supervisor => None,
        };
        UserProfile {
            id,
            role: self.role,
            display_name: self.display_name.trim().to_string(),
            email: normalize_email(&self.email),
            height_m: self.height_m,
            unit_prefs: self.unit_prefs,
            language: self.language,
            targets,
            credential_hash: self.credential_hash,
        }
    }
}

pub fn normalize_email(email: &str) -> String {
    email.trim().to_lowercase()
}

impl UserProfile {
    pub fn is_patient(&self) -> bool {
        self.role == Role::Patient
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let name_len = self.display_name.chars().count();
        if self.display_name.trim().is_empty() {
            out.push(Violation::new("profile.display_name_empty", "display name is required"));
        } else if name_len > 100 {
            out.push(Violation::new("profile.display_name_too_long", "display name exceeds 100 characters"));
        }
        if !email_looks_valid(&self.email) || self.email != normalize_email(&self.email) {
            out.push(Violation::new("profile.email_invalid", "email address is not valid"));
        }
        match self.role {
            Role::Patient => {
                if let Some(h) = self.height_m {
                    if !in_range(h, HEIGHT_M_BOUNDS) {
                        out.push(Violation::new(
                            "profile.height_out_of_bounds",
                            format!("height {h} m outside 0.3-2.8 m"),
                        ));
                    }
                }
                match &self.targets {
                    Some(t) => out.extend(t.violations()),
                    None => out.push(Violation::new("profile.targets_missing", "patients carry target ranges")),
                }
            }
            Role::Supervisor => {
                if self.height_m.is_some() {
                    out.push(Violation::new("profile.supervisor_height", "supervisors carry no height"));
                }
                if self.targets.is_some() {
                    out.push(Violation::new("profile.supervisor_targets", "supervisors carry no targets"));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// BMI for a canonical weight, using the height on this profile.
    pub fn bmi(&self, weight_kg: f64) -> Result<f64> {
        let height = self
            .height_m
            .ok_or_else(|| Error::invalid("profile.height_required", "height required to compute BMI"))?;
        crate::units::compute_bmi(weight_kg, height)
    }
}

fn email_looks_valid(email: &str) -> bool {
    let Some((local, domain)) = email.split_once('@') else {
        return false;
    };
    !local.is_empty()
        && !domain.is_empty()
        && !domain.starts_with('.')
        && !domain.ends_with('.')
        && !email.chars().any(char::is_whitespace)
        && email.len() <= 254
}
