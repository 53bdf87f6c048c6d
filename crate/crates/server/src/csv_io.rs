//! CSV export and import: one file per record type plus `users.csv` and
//! `links.csv`, canonical units, UTC timestamps. See `docs/csv-format.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use glycotrack_core::domain::{
    BloodPressure, BodyWeight, CarbIntake, GlucoseReading, InsulinDose, Intensity, Language, Meal,
    MealRelation, MealSlot, MedicationRecord, PhysicalActivity, Record, RecordId, RecordKind, Role,
    StoredRecord, TargetRanges, UnitPrefs, UserId, UserProfile,
};
use glycotrack_core::persistence::{Snapshot, Store};
use glycotrack_core::supervision::{LinkStatus, SupervisionLink};
use glycotrack_core::units::{GlucoseUnit, WeightUnit};
use glycotrack_core::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const USERS_FILE: &str = "users.csv";
pub const LINKS_FILE: &str = "links.csv";

/// Rows that fail are reported together, up to this many.
const MAX_DIAGNOSTICS: usize = 50;

pub fn kind_file(kind: RecordKind) -> String {
    format!("{}.csv", kind.as_str())
}

/// Problems found while importing, each as `file:line: message`. Line 1 is
/// the header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvError {
    pub diagnostics: Vec<String>,
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.diagnostics.join("\n"))
    }
}

impl std::error::Error for CsvError {}

impl CsvError {
    fn single(message: impl Into<String>) -> Self {
        CsvError {
            diagnostics: vec![message.into()],
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct UserRow {
    id: u64,
    role: Role,
    display_name: String,
    email: String,
    height_m: Option<f64>,
    glucose_unit: GlucoseUnit,
    weight_unit: WeightUnit,
    language: Language,
    glucose_low_mg_dl: Option<f64>,
    glucose_high_mg_dl: Option<f64>,
    bp_sys_high_mmhg: Option<u16>,
    bp_dia_high_mmhg: Option<u16>,
    credential_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkRow {
    patient_id: u64,
    supervisor_id: u64,
    created_at: DateTime<Utc>,
    status: LinkStatus,
    revoked_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GlucoseRow {
    id: u64,
    patient_id: u64,
    taken_at: DateTime<Utc>,
    value_mg_dl: f64,
    meal: Option<Meal>,
    relation: Option<MealRelation>,
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InsulinRow {
    id: u64,
    patient_id: u64,
    taken_at: DateTime<Utc>,
    units: f64,
    insulin_kind: String,
    meal: Option<Meal>,
    relation: Option<MealRelation>,
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CarbsRow {
    id: u64,
    patient_id: u64,
    taken_at: DateTime<Utc>,
    grams: f64,
    meal: Option<Meal>,
    relation: Option<MealRelation>,
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MedicationRow {
    id: u64,
    patient_id: u64,
    taken_at: DateTime<Utc>,
    name: String,
    dose: String,
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ActivityRow {
    id: u64,
    patient_id: u64,
    performed_at: DateTime<Utc>,
    intensity: Intensity,
    duration_min: u32,
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightRow {
    id: u64,
    patient_id: u64,
    measured_at: DateTime<Utc>,
    value_kg: f64,
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BloodPressureRow {
    id: u64,
    patient_id: u64,
    measured_at: DateTime<Utc>,
    systolic_mmhg: u16,
    diastolic_mmhg: u16,
    note: Option<String>,
}

const USER_HEADER: &[&str] = &[
    "id",
    "role",
    "display_name",
    "email",
    "height_m",
    "glucose_unit",
    "weight_unit",
    "language",
    "glucose_low_mg_dl",
    "glucose_high_mg_dl",
    "bp_sys_high_mmhg",
    "bp_dia_high_mmhg",
    "credential_hash",
];
const LINK_HEADER: &[&str] = &["patient_id", "supervisor_id", "created_at", "status", "revoked_at"];

fn header(kind: RecordKind) -> &'static [&'static str] {
    match kind {
        RecordKind::Glucose => &["id", "patient_id", "taken_at", "value_mg_dl", "meal", "relation", "note"],
        RecordKind::Insulin => &[
            "id",
            "patient_id",
            "taken_at",
            "units",
            "insulin_kind",
            "meal",
            "relation",
            "note",
        ],
        RecordKind::Carbs => &["id", "patient_id", "taken_at", "grams", "meal", "relation", "note"],
        RecordKind::Medication => &["id", "patient_id", "taken_at", "name", "dose", "note"],
        RecordKind::Activity => &["id", "patient_id", "performed_at", "intensity", "duration_min", "note"],
        RecordKind::Weight => &["id", "patient_id", "measured_at", "value_kg", "note"],
        RecordKind::BloodPressure => &["id", "patient_id", "measured_at", "systolic_mmhg", "diastolic_mmhg", "note"],
    }
}

fn slot_parts(slot: Option<MealSlot>) -> (Option<Meal>, Option<MealRelation>) {
    (slot.map(|s| s.meal), slot.map(|s| s.relation))
}

fn user_row(u: &UserProfile) -> UserRow {
    UserRow {
        id: u.id.0,
        role: u.role,
        display_name: u.display_name.clone(),
        email: u.email.clone(),
        height_m: u.height_m,
        glucose_unit: u.unit_prefs.glucose,
        weight_unit: u.unit_prefs.weight,
        language: u.language,
        glucose_low_mg_dl: u.targets.map(|t| t.glucose_low),
        glucose_high_mg_dl: u.targets.map(|t| t.glucose_high),
        bp_sys_high_mmhg: u.targets.map(|t| t.bp_sys_high),
        bp_dia_high_mmhg: u.targets.map(|t| t.bp_dia_high),
        credential_hash: u.credential_hash.clone(),
    }
}

fn user_from_row(r: UserRow) -> Result<UserProfile, String> {
    let targets = match (r.glucose_low_mg_dl, r.glucose_high_mg_dl, r.bp_sys_high_mmhg, r.bp_dia_high_mmhg) {
        (Some(glucose_low), Some(glucose_high), Some(bp_sys_high), Some(bp_dia_high)) => Some(TargetRanges {
            glucose_low,
            glucose_high,
            bp_sys_high,
            bp_dia_high,
        }),
        (None, None, None, None) => None,
        _ => return Err("target columns must be all filled or all empty".into()),
    };
    Ok(UserProfile {
        id: UserId(r.id),
        role: r.role,
        display_name: r.display_name,
        email: r.email,
        height_m: r.height_m,
        unit_prefs: UnitPrefs {
            glucose: r.glucose_unit,
            weight: r.weight_unit,
        },
        language: r.language,
        targets,
        credential_hash: r.credential_hash,
    })
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<File>, Error> {
    let path = dir.join(name);
    // Headers are written explicitly so that empty files still carry one.
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .map_err(|e| csv_io_error(&path, e))
}

fn csv_io_error(path: &Path, e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(format!("{}: {e}", path.display())))
}

/// Writes every user, link and record of `store` into `dir`, which is
/// created if needed. Returns the files written.
pub fn export(store: &dyn Store, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir)?;
    let mut snap = store.snapshot()?;
    snap.users.sort_by_key(|u| u.id);
    snap.records.sort_by_key(|r| r.id);
    let mut written = Vec::new();

    let mut w = writer(dir, USERS_FILE)?;
    w.write_record(USER_HEADER).map_err(|e| csv_io_error(dir, e))?;
    for u in &snap.users {
        w.serialize(user_row(u)).map_err(|e| csv_io_error(dir, e))?;
    }
    w.flush()?;
    written.push(dir.join(USERS_FILE));

    let mut w = writer(dir, LINKS_FILE)?;
    w.write_record(LINK_HEADER).map_err(|e| csv_io_error(dir, e))?;
    for l in &snap.links {
        w.serialize(LinkRow {
            patient_id: l.patient.0,
            supervisor_id: l.supervisor.0,
            created_at: l.created_at,
            status: l.status,
            revoked_at: l.revoked_at,
        })
        .map_err(|e| csv_io_error(dir, e))?;
    }
    w.flush()?;
    written.push(dir.join(LINKS_FILE));

    for kind in RecordKind::ALL {
        let name = kind_file(kind);
        let mut w = writer(dir, &name)?;
        w.write_record(header(kind)).map_err(|e| csv_io_error(dir, e))?;
        for s in snap.records.iter().filter(|s| s.record.kind() == kind) {
            write_record(&mut w, s).map_err(|e| csv_io_error(dir, e))?;
        }
        w.flush()?;
        written.push(dir.join(name));
    }
    Ok(written)
}

fn write_record(w: &mut csv::Writer<File>, s: &StoredRecord) -> csv::Result<()> {
    let id = s.id.0;
    match &s.record {
        Record::Glucose(r) => {
            let (meal, relation) = slot_parts(r.slot);
            w.serialize(GlucoseRow {
                id,
                patient_id: r.patient.0,
                taken_at: r.taken_at,
                value_mg_dl: r.value_mg_dl,
                meal,
                relation,
                note: r.note.clone(),
            })
        }
        Record::Insulin(r) => {
            let (meal, relation) = slot_parts(r.slot);
            w.serialize(InsulinRow {
                id,
                patient_id: r.patient.0,
                taken_at: r.taken_at,
                units: r.units,
                insulin_kind: r.insulin_kind.clone(),
                meal,
                relation,
                note: r.note.clone(),
            })
        }
        Record::Carbs(r) => {
            let (meal, relation) = slot_parts(r.slot);
            w.serialize(CarbsRow {
                id,
                patient_id: r.patient.0,
                taken_at: r.taken_at,
                grams: r.grams,
                meal,
                relation,
                note: r.note.clone(),
            })
        }
        Record::Medication(r) => w.serialize(MedicationRow {
            id,
            patient_id: r.patient.0,
            taken_at: r.taken_at,
            name: r.name.clone(),
            dose: r.dose.clone(),
            note: r.note.clone(),
        }),
        Record::Activity(r) => w.serialize(ActivityRow {
            id,
            patient_id: r.patient.0,
            performed_at: r.performed_at,
            intensity: r.intensity,
            duration_min: r.duration_min,
            note: r.note.clone(),
        }),
        Record::Weight(r) => w.serialize(WeightRow {
            id,
            patient_id: r.patient.0,
            measured_at: r.measured_at,
            value_kg: r.value_kg,
            note: r.note.clone(),
        }),
        Record::BloodPressure(r) => w.serialize(BloodPressureRow {
            id,
            patient_id: r.patient.0,
            measured_at: r.measured_at,
            systolic_mmhg: r.systolic,
            diastolic_mmhg: r.diastolic,
            note: r.note.clone(),
        }),
    }
}

fn slot_of(meal: Option<Meal>, relation: Option<MealRelation>) -> Result<Option<MealSlot>, String> {
    MealSlot::from_parts(meal, relation).map_err(|e| violation_text(&e))
}

fn violation_text(e: &Error) -> String {
    match e {
        Error::Validation(v) => v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
        other => other.to_string(),
    }
}

fn record_from_row(kind: RecordKind, raw: &csv::StringRecord, headers: &csv::StringRecord) -> Result<StoredRecord, String> {
    fn de<T: DeserializeOwned>(raw: &csv::StringRecord, headers: &csv::StringRecord) -> Result<T, String> {
        raw.deserialize(Some(headers)).map_err(|e| describe(&e, headers))
    }
    let (id, record) = match kind {
        RecordKind::Glucose => {
            let r: GlucoseRow = de(raw, headers)?;
            let rec = Record::Glucose(GlucoseReading {
                patient: UserId(r.patient_id),
                value_mg_dl: r.value_mg_dl,
                taken_at: r.taken_at,
                slot: slot_of(r.meal, r.relation)?,
                note: r.note,
            });
            (r.id, rec)
        }
        RecordKind::Insulin => {
            let r: InsulinRow = de(raw, headers)?;
            let rec = Record::Insulin(InsulinDose {
                patient: UserId(r.patient_id),
                units: r.units,
                insulin_kind: r.insulin_kind,
                taken_at: r.taken_at,
                slot: slot_of(r.meal, r.relation)?,
                note: r.note,
            });
            (r.id, rec)
        }
        RecordKind::Carbs => {
            let r: CarbsRow = de(raw, headers)?;
            let rec = Record::Carbs(CarbIntake {
                patient: UserId(r.patient_id),
                grams: r.grams,
                taken_at: r.taken_at,
                slot: slot_of(r.meal, r.relation)?,
                note: r.note,
            });
            (r.id, rec)
        }
        RecordKind::Medication => {
            let r: MedicationRow = de(raw, headers)?;
            let rec = Record::Medication(MedicationRecord {
                patient: UserId(r.patient_id),
                name: r.name,
                dose: r.dose,
                taken_at: r.taken_at,
                note: r.note,
            });
            (r.id, rec)
        }
        RecordKind::Activity => {
            let r: ActivityRow = de(raw, headers)?;
            let rec = Record::Activity(PhysicalActivity {
                patient: UserId(r.patient_id),
                intensity: r.intensity,
                duration_min: r.duration_min,
                performed_at: r.performed_at,
                note: r.note,
            });
            (r.id, rec)
        }
        RecordKind::Weight => {
            let r: WeightRow = de(raw, headers)?;
            let rec = Record::Weight(BodyWeight {
                patient: UserId(r.patient_id),
                value_kg: r.value_kg,
                measured_at: r.measured_at,
                note: r.note,
            });
            (r.id, rec)
        }
        RecordKind::BloodPressure => {
            let r: BloodPressureRow = de(raw, headers)?;
            let rec = Record::BloodPressure(BloodPressure {
                patient: UserId(r.patient_id),
                systolic: r.systolic_mmhg,
                diastolic: r.diastolic_mmhg,
                measured_at: r.measured_at,
                note: r.note,
            });
            (r.id, rec)
        }
    };
    let violations = record.violations();
    if !violations.is_empty() {
        return Err(violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
    }
    Ok(StoredRecord {
        id: RecordId(id),
        record,
    })
}

fn deserialize_message(err: &csv::DeserializeError) -> String {
    match err.kind() {
        csv::DeserializeErrorKind::Message(m) | csv::DeserializeErrorKind::Unsupported(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Reads one CSV file, checking its header exactly and handing each data
/// row with its physical line number to `row`.
fn read_file(
    path: &Path,
    expected: &[&str],
    diags: &mut Vec<String>,
    mut row: impl FnMut(&csv::StringRecord, &csv::StringRecord) -> Result<(), String>,
) {
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut reader = match csv::ReaderBuilder::new().has_headers(true).from_path(path) {
        Ok(r) => r,
        Err(e) => {
            diags.push(format!("{name}: {e}"));
            return;
        }
    };
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            diags.push(format!("{name}:1: {e}"));
            return;
        }
    };
    if headers.iter().ne(expected.iter().copied()) {
        diags.push(format!("{name}:1: expected header '{}'", expected.join(",")));
        return;
    }
    let mut raw = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut raw) {
            Ok(false) => break,
            Ok(true) => {
                let line = raw.position().map_or(0, |p| p.line());
                if let Err(m) = row(&raw, &headers) {
                    diags.push(format!("{name}:{line}: {m}"));
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                diags.push(format!("{name}:{line}: {}", csv_message(&e)));
                if !matches!(e.kind(), csv::ErrorKind::UnequalLengths { .. } | csv::ErrorKind::Utf8 { .. }) {
                    break;
                }
            }
        }
        if diags.len() >= MAX_DIAGNOSTICS {
            break;
        }
    }
}

fn csv_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "row is not valid UTF-8".to_string(),
        _ => e.to_string(),
    }
}

fn finish<T>(diags: Vec<String>, value: T) -> Result<T, CsvError> {
    if diags.is_empty() {
        Ok(value)
    } else {
        Err(CsvError { diagnostics: diags })
    }
}

/// Parses a directory written by [`export`] into a snapshot that keeps
/// every id. Missing files count as empty; nothing is loaded on error.
pub fn read_dir(dir: &Path) -> Result<Snapshot, CsvError> {
    if !dir.is_dir() {
        return Err(CsvError::single(format!("{}: not a directory", dir.display())));
    }
    let mut diags = Vec::new();
    let mut users: Vec<UserProfile> = Vec::new();
    let mut roles: BTreeMap<UserId, Role> = BTreeMap::new();
    let mut emails = BTreeSet::new();

    let users_path = dir.join(USERS_FILE);
    if users_path.exists() {
        read_file(&users_path, USER_HEADER, &mut diags, |raw, headers| {
            let row: UserRow = raw.deserialize(Some(headers)).map_err(|e| describe(&e, headers))?;
            let profile = user_from_row(row)?;
            profile.validate().map_err(|e| violation_text(&e))?;
            if roles.insert(profile.id, profile.role).is_some() {
                return Err(format!("duplicate user id {}", profile.id));
            }
            if !emails.insert(profile.email.clone()) {
                return Err(format!("duplicate email {}", profile.email));
            }
            users.push(profile);
            Ok(())
        });
    }

    let mut links = Vec::new();
    let mut active = BTreeSet::new();
    let links_path = dir.join(LINKS_FILE);
    if links_path.exists() {
        read_file(&links_path, LINK_HEADER, &mut diags, |raw, headers| {
            let row: LinkRow = raw.deserialize(Some(headers)).map_err(|e| describe(&e, headers))?;
            let (p, s) = (UserId(row.patient_id), UserId(row.supervisor_id));
            if roles.get(&p) != Some(&Role::Patient) {
                return Err(format!("patient_id {p} is not a patient in {USERS_FILE}"));
            }
            if roles.get(&s) != Some(&Role::Supervisor) {
                return Err(format!("supervisor_id {s} is not a supervisor in {USERS_FILE}"));
            }
            if (row.status == LinkStatus::Revoked) != row.revoked_at.is_some() {
                return Err("revoked_at must be set exactly for revoked links".into());
            }
            if row.status == LinkStatus::Active && !active.insert((p, s)) {
                return Err(format!("second active link {p}->{s}"));
            }
            links.push(SupervisionLink {
                patient: p,
                supervisor: s,
                created_at: row.created_at,
                status: row.status,
                revoked_at: row.revoked_at,
            });
            Ok(())
        });
    }

    let mut records = Vec::new();
    let mut ids = BTreeSet::new();
    for kind in RecordKind::ALL {
        let path = dir.join(kind_file(kind));
        if !path.exists() {
            continue;
        }
        read_file(&path, header(kind), &mut diags, |raw, headers| {
            let stored = record_from_row(kind, raw, headers)?;
            check_owner(&roles, stored.record.patient())?;
            if !ids.insert(stored.id) {
                return Err(format!("duplicate record id {}", stored.id));
            }
            records.push(stored);
            Ok(())
        });
    }

    let snapshot = Snapshot {
        next_user_id: users.iter().map(|u| u.id.0 + 1).max().unwrap_or(1),
        next_record_id: records.iter().map(|r| r.id.0 + 1).max().unwrap_or(1),
        users,
        records,
        links,
    };
    finish(diags, snapshot)
}

fn check_owner(roles: &BTreeMap<UserId, Role>, patient: UserId) -> Result<(), String> {
    match roles.get(&patient) {
        Some(Role::Patient) => Ok(()),
        Some(Role::Supervisor) => Err(format!("patient_id {patient} is a supervisor")),
        None => Err(format!("patient_id {patient} is not a known user")),
    }
}

fn describe(e: &csv::Error, headers: &csv::StringRecord) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(i) => format!("column '{}': {}", headers.get(i as usize).unwrap_or("?"), deserialize_message(err)),
            None => deserialize_message(err),
        },
        _ => e.to_string(),
    }
}

/// Parses a single record file, naming its kind by the file stem.
pub fn read_records_file(path: &Path, known: &BTreeMap<UserId, Role>) -> Result<Vec<Record>, CsvError> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let kind: RecordKind = stem.parse().map_err(|_| {
        CsvError::single(format!(
            "{}: file name must be one of {}",
            path.display(),
            RecordKind::ALL.map(kind_file).join(", ")
        ))
    })?;
    let mut diags = Vec::new();
    let mut out = Vec::new();
    read_file(path, header(kind), &mut diags, |raw, headers| {
        let stored = record_from_row(kind, raw, headers)?;
        check_owner(known, stored.record.patient())?;
        out.push(stored.record);
        Ok(())
    });
    finish(diags, out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportSummary {
    pub users: usize,
    pub links: usize,
    pub records: usize,
}

#[derive(Debug)]
pub enum ImportError {
    Csv(CsvError),
    Store(Error),
}

impl fmt::Display for ImportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImportError::Csv(e) => e.fmt(f),
            ImportError::Store(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for ImportError {}

/// Imports `path`. A directory from [`export`] loads into an empty store
/// with ids preserved. A single `<kind>.csv` appends its records to the
/// existing patients, with fresh ids. All rows are validated before
/// anything is written.
pub fn import(store: &dyn Store, path: &Path) -> Result<ImportSummary, ImportError> {
    if path.is_dir() {
        let snapshot = read_dir(path).map_err(ImportError::Csv)?;
        let summary = ImportSummary {
            users: snapshot.users.len(),
            links: snapshot.links.len(),
            records: snapshot.records.len(),
        };
        store.load_snapshot(snapshot).map_err(ImportError::Store)?;
        return Ok(summary);
    }
    let known: BTreeMap<UserId, Role> = store
        .users()
        .map_err(ImportError::Store)?
        .into_iter()
        .map(|u| (u.id, u.role))
        .collect();
    let records = read_records_file(path, &known).map_err(ImportError::Csv)?;
    let n = records.len();
    for r in records {
        store.put_record(r).map_err(ImportError::Store)?;
    }
    Ok(ImportSummary {
        users: 0,
        links: 0,
        records: n,
    })
}
