//! Deterministic demo dataset: two patients, two supervisors, four weeks
//! of diary entries.

use chrono::{Duration, NaiveDate, NaiveTime, TimeZone, Utc};
use glycotrack_core::domain::{
    BloodPressure, BodyWeight, CarbIntake, GlucoseReading, InsulinDose, Intensity, Language, Meal,
    MealRelation, MealSlot, MedicationRecord, NewUser, PhysicalActivity, Record, Role, Timestamp,
    UnitPrefs, UserId,
};
use glycotrack_core::persistence::Store;
use glycotrack_core::units::{GlucoseUnit, WeightUnit};
use glycotrack_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_ANCHOR: NaiveDate = match NaiveDate::from_ymd_opt(2025, 1, 6) {
    Some(d) => d,
    None => panic!("valid date"),
};
pub const SEED_DAYS: i64 = 28;
pub const DEMO_PASSWORD: &str = "demo-password";
const RNG_SEED: u64 = 0x6c79_636f;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSummary {
    pub patients: Vec<UserId>,
    pub supervisors: Vec<UserId>,
    pub records: usize,
}

struct Person {
    role: Role,
    name: &'static str,
    email: &'static str,
    height_m: Option<f64>,
    units: UnitPrefs,
    language: Language,
}

const PEOPLE: [Person; 4] = [
    Person {
        role: Role::Patient,
        name: "Lucía Gómez",
        email: "lucia.gomez@example.org",
        height_m: Some(1.64),
        units: UnitPrefs {
            glucose: GlucoseUnit::MgPerDl,
            weight: WeightUnit::Kilograms,
        },
        language: Language::Es,
    },
    Person {
        role: Role::Patient,
        name: "Martin Hale",
        email: "martin.hale@example.org",
        height_m: Some(1.78),
        units: UnitPrefs {
            glucose: GlucoseUnit::MmolPerL,
            weight: WeightUnit::Pounds,
        },
        language: Language::En,
    },
    Person {
        role: Role::Supervisor,
        name: "Dra. Ana Pérez",
        email: "ana.perez@example.org",
        height_m: None,
        units: UnitPrefs {
            glucose: GlucoseUnit::MgPerDl,
            weight: WeightUnit::Kilograms,
        },
        language: Language::Es,
    },
    Person {
        role: Role::Supervisor,
        name: "Jorge Díaz",
        email: "jorge.diaz@example.org",
        height_m: None,
        units: UnitPrefs {
            glucose: GlucoseUnit::MmolPerL,
            weight: WeightUnit::Kilograms,
        },
        language: Language::En,
    },
];

/// Loads the demo into an empty store. Records cover the `SEED_DAYS` days
/// starting at `anchor` (UTC). Every account uses [`DEMO_PASSWORD`],
/// hashed by `hash`. The generated records depend only on `anchor`.
pub fn seed(store: &dyn Store, anchor: NaiveDate, hash: &dyn Fn(&str) -> String) -> Result<SeedSummary> {
    let snap = store.snapshot()?;
    if !snap.is_empty() {
        return Err(Error::Conflict("store_not_empty"));
    }
    let mut ids = Vec::new();
    for p in &PEOPLE {
        let user = store.create_user(NewUser {
            role: p.role,
            display_name: p.name.to_string(),
            email: p.email.to_string(),
            height_m: p.height_m,
            unit_prefs: p.units,
            language: p.language,
            credential_hash: hash(DEMO_PASSWORD),
        })?;
        ids.push(user.id);
    }
    let (lucia, martin, ana) = (ids[0], ids[1], ids[2]);
    let start = Utc.from_utc_datetime(&anchor.and_time(NaiveTime::MIN));
    store.create_link(lucia, ana, start)?;

    let records = demo_records(&[lucia, martin], anchor);
    let n = records.len();
    for r in records {
        store.put_record(r)?;
    }
    Ok(SeedSummary {
        patients: vec![lucia, martin],
        supervisors: vec![ids[2], ids[3]],
        records: n,
    })
}

const MEAL_HOURS: [(Meal, u32); 4] = [
    (Meal::Breakfast, 8),
    (Meal::Lunch, 13),
    (Meal::Snack, 17),
    (Meal::Dinner, 21),
];

/// The demo records for `patients`, in generation order.
pub fn demo_records(patients: &[UserId], anchor: NaiveDate) -> Vec<Record> {
    let mut rng = ChaCha8Rng::seed_from_u64(RNG_SEED);
    let mut out = Vec::new();
    for (pi, &patient) in patients.iter().enumerate() {
        let mut weight_kg = if pi == 0 { 63.0 } else { 84.0 };
        for day in 0..SEED_DAYS {
            let midnight = Utc.from_utc_datetime(&(anchor + Duration::days(day)).and_time(NaiveTime::MIN));
            let at = |h: u32, m: i64| midnight + Duration::hours(i64::from(h)) + Duration::minutes(m);
            for (meal, hour) in MEAL_HOURS {
                let meal_time = at(hour, rng.random_range(0..30));
                if rng.random_bool(0.9) {
                    let value = if rng.random_bool(0.06) {
                        rng.random_range(55..70)
                    } else {
                        rng.random_range(85..160)
                    };
                    out.push(glucose(patient, value, meal_time - Duration::minutes(10), meal, MealRelation::Before));
                }
                if rng.random_bool(0.75) {
                    let value = rng.random_range(110..240);
                    out.push(glucose(patient, value, meal_time + Duration::minutes(105), meal, MealRelation::After));
                }
                let grams = f64::from(rng.random_range(if meal == Meal::Snack { 10..35 } else { 35..95 }));
                out.push(Record::Carbs(CarbIntake {
                    patient,
                    grams,
                    taken_at: meal_time,
                    slot: Some(MealSlot::new(meal, MealRelation::Before)),
                    note: None,
                }));
                if meal != Meal::Snack {
                    let units = f64::from(rng.random_range(6..20)) / 2.0;
                    out.push(Record::Insulin(InsulinDose {
                        patient,
                        units,
                        insulin_kind: "rapid".to_string(),
                        taken_at: meal_time - Duration::minutes(5),
                        slot: Some(MealSlot::new(meal, MealRelation::Before)),
                        note: None,
                    }));
                }
            }
            out.push(Record::Insulin(InsulinDose {
                patient,
                units: if pi == 0 { 16.0 } else { 22.0 },
                insulin_kind: "basal".to_string(),
                taken_at: at(22, 30),
                slot: None,
                note: None,
            }));
            if pi == 1 {
                out.push(Record::Medication(MedicationRecord {
                    patient,
                    name: "Metformin".to_string(),
                    dose: "850 mg".to_string(),
                    taken_at: at(8, 45),
                    note: None,
                }));
            }
            if rng.random_bool(0.6) {
                let intensity = [Intensity::Low, Intensity::Moderate, Intensity::High][rng.random_range(0..3)];
                out.push(Record::Activity(PhysicalActivity {
                    patient,
                    intensity,
                    duration_min: rng.random_range(20..75),
                    performed_at: at(18, rng.random_range(0..60)),
                    note: (intensity == Intensity::High).then(|| "Running".to_string()),
                }));
            }
            if day % 3 == 0 {
                weight_kg += f64::from(rng.random_range(-6..5)) / 10.0;
                out.push(Record::Weight(BodyWeight {
                    patient,
                    value_kg: (weight_kg * 10.0).round() / 10.0,
                    measured_at: at(7, 30),
                    note: None,
                }));
            }
            let systolic = rng.random_range(108..142);
            out.push(Record::BloodPressure(BloodPressure {
                patient,
                systolic,
                diastolic: rng.random_range(68..(systolic - 30).min(94)),
                measured_at: at(7, 40),
                note: None,
            }));
        }
    }
    out
}

fn glucose(patient: UserId, value: u32, taken_at: Timestamp, meal: Meal, relation: MealRelation) -> Record {
    Record::Glucose(GlucoseReading {
        patient,
        value_mg_dl: f64::from(value),
        taken_at,
        slot: Some(MealSlot::new(meal, relation)),
        note: None,
    })
}
