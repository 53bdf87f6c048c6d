//! Random users and records inside the domain bounds.

use chrono::{DateTime, Duration, TimeZone, Utc};
use glycotrack_core::domain::{
    BloodPressure, BodyWeight, CarbIntake, GlucoseReading, InsulinDose, Intensity, Language, Meal,
    MealRelation, MealSlot, MedicationRecord, NewUser, PhysicalActivity, Record, Role, TargetRanges,
    UnitPrefs, UserId,
};
use glycotrack_core::persistence::Store;
use glycotrack_core::units::{GlucoseUnit, WeightUnit};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A Monday, so fixture weeks line up with the grid.
pub fn base() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 3, 3, 0, 0, 0).unwrap()
}

pub const SPAN_DAYS: i64 = 21;

pub fn instant(rng: &mut ChaCha8Rng) -> DateTime<Utc> {
    // Coarse grid half the time so ties and exact boundaries occur.
    let secs = if rng.random_bool(0.5) {
        rng.random_range(0..SPAN_DAYS * 24) * 3600
    } else {
        rng.random_range(0..SPAN_DAYS * 86_400)
    };
    base() + Duration::seconds(secs)
}

fn slot(rng: &mut ChaCha8Rng) -> Option<MealSlot> {
    if rng.random_bool(0.15) {
        return None;
    }
    let meal = Meal::ALL[rng.random_range(0..4)];
    let relation = if rng.random_bool(0.5) { MealRelation::Before } else { MealRelation::After };
    Some(MealSlot::new(meal, relation))
}

fn note(rng: &mut ChaCha8Rng) -> Option<String> {
    const NOTES: [&str; 5] = ["after a walk", "sensor, \"new\" batch", "línea 1\nlínea 2", "x", "tired; skipped snack"];
    rng.random_bool(0.3).then(|| NOTES[rng.random_range(0..NOTES.len())].to_string())
}

pub fn record(rng: &mut ChaCha8Rng, patient: UserId) -> Record {
    let at = instant(rng);
    match rng.random_range(0..7) {
        0 | 1 => Record::Glucose(GlucoseReading {
            patient,
            // Multiples of ten land on target bounds.
            value_mg_dl: if rng.random_bool(0.3) {
                f64::from(rng.random_range(4..30) * 10)
            } else {
                rng.random_range(10.0..=1000.0)
            },
            taken_at: at,
            slot: slot(rng),
            note: note(rng),
        }),
        2 => Record::Insulin(InsulinDose {
            patient,
            units: rng.random_range(0.5..=40.0),
            insulin_kind: ["rapid", "basal", "mixed"][rng.random_range(0..3)].into(),
            taken_at: at,
            slot: slot(rng),
            note: note(rng),
        }),
        3 => Record::Carbs(CarbIntake {
            patient,
            grams: rng.random_range(1.0..=150.0),
            taken_at: at,
            slot: slot(rng),
            note: note(rng),
        }),
        4 => {
            if rng.random_bool(0.5) {
                Record::Activity(PhysicalActivity {
                    patient,
                    intensity: [Intensity::Low, Intensity::Moderate, Intensity::High][rng.random_range(0..3)],
                    duration_min: rng.random_range(1..=240),
                    performed_at: at,
                    note: note(rng),
                })
            } else {
                Record::Medication(MedicationRecord {
                    patient,
                    name: ["metformin", "lisinopril"][rng.random_range(0..2)].into(),
                    dose: "10 mg".into(),
                    taken_at: at,
                    note: note(rng),
                })
            }
        }
        5 => Record::Weight(BodyWeight {
            patient,
            value_kg: rng.random_range(1.0..=500.0),
            measured_at: at,
            note: note(rng),
        }),
        _ => {
            let diastolic = rng.random_range(40..=120);
            Record::BloodPressure(BloodPressure {
                patient,
                systolic: rng.random_range(diastolic + 1..=220),
                diastolic,
                measured_at: at,
                note: note(rng),
            })
        }
    }
}

pub fn targets(rng: &mut ChaCha8Rng) -> TargetRanges {
    let low = f64::from(rng.random_range(6..=11) * 10);
    TargetRanges {
        glucose_low: low,
        glucose_high: low + f64::from(rng.random_range(1..=12) * 10),
        bp_sys_high: rng.random_range(110..=150),
        bp_dia_high: rng.random_range(70..=95),
    }
}

pub fn prefs(rng: &mut ChaCha8Rng) -> UnitPrefs {
    UnitPrefs {
        glucose: GlucoseUnit::ALL[rng.random_range(0..2)],
        weight: if rng.random_bool(0.5) { WeightUnit::Kilograms } else { WeightUnit::Pounds },
    }
}

/// Adds a user with randomized preferences; patients get random targets
/// and usually a height.
pub fn add_user(store: &dyn Store, rng: &mut ChaCha8Rng, role: Role, n: usize) -> UserId {
    let profile = store
        .create_user(NewUser {
            role,
            display_name: format!("User {n} Ñandú"),
            email: format!("user{n}@example.org"),
            height_m: (role == Role::Patient && rng.random_bool(0.8)).then(|| rng.random_range(1.2..=2.1)),
            unit_prefs: prefs(rng),
            language: if rng.random_bool(0.5) { Language::En } else { Language::Es },
            credential_hash: format!("$argon2id$v=19$m=64,t=1,p=1$fixture{n}"),
        })
        .unwrap();
    if role == Role::Patient {
        let mut p = profile.clone();
        p.targets = Some(targets(rng));
        store.update_user(&p).unwrap();
    }
    profile.id
}
