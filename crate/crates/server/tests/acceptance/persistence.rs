//! Backup/restore and CSV export/import as observational identities, and
//! the scheduler's backup count under a simulated clock.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration as StdDuration, Instant};

use chrono::Duration;
use glycotrack_core::analytics::Window;
use glycotrack_core::clock::{Clock, ManualClock};
use glycotrack_core::domain::{RecordKind, Role, StoredRecord, UserId, UserProfile};
use glycotrack_core::persistence::{
    backup_snapshot, restore, spawn_backup_scheduler, BackupJob, BackupSchedule, MemoryStore, SqliteStore, Store,
};
use glycotrack_core::supervision::SupervisionLink;
use glycotrack_server::csv_io;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fixtures;

/// Everything a caller can read back through the store interface,
/// sessions aside.
#[derive(Debug, PartialEq)]
struct Observed {
    users: Vec<UserProfile>,
    by_email: Vec<Option<UserId>>,
    records: BTreeMap<(UserId, RecordKind), Vec<StoredRecord>>,
    windowed: Vec<Vec<StoredRecord>>,
    links: Vec<(Vec<SupervisionLink>, Vec<SupervisionLink>)>,
    active: Vec<bool>,
    counts: BTreeMap<String, u64>,
}

fn observe(store: &dyn Store) -> Observed {
    let users = store.users().unwrap();
    let all = Window::new(
        fixtures::base() - Duration::days(365),
        fixtures::base() + Duration::days(365),
    )
    .unwrap();
    let mut records = BTreeMap::new();
    let mut windowed = Vec::new();
    let mut links = Vec::new();
    let mut active = Vec::new();
    for u in &users {
        for kind in RecordKind::ALL {
            records.insert((u.id, kind), store.query_records(u.id, &[kind], &all).unwrap());
        }
        for day in 0..fixtures::SPAN_DAYS {
            let start = fixtures::base() + Duration::days(day);
            let w = Window::new(start, start + Duration::hours(30)).unwrap();
            windowed.push(store.query_records(u.id, &[], &w).unwrap());
        }
        links.push((store.links_of_patient(u.id).unwrap(), store.links_of_supervisor(u.id).unwrap()));
        for v in &users {
            active.push(store.has_active_link(u.id, v.id).unwrap());
        }
    }
    Observed {
        by_email: users
            .iter()
            .map(|u| store.user_by_email(&u.email.to_uppercase()).unwrap().map(|p| p.id))
            .collect(),
        users,
        records,
        windowed,
        links,
        active,
        counts: store.counts().unwrap(),
    }
}

fn random_store(rng: &mut ChaCha8Rng, sqlite: bool) -> Box<dyn Store> {
    let store: Box<dyn Store> = if sqlite {
        Box::new(SqliteStore::open_in_memory().unwrap())
    } else {
        Box::new(MemoryStore::new())
    };
    let s = store.as_ref();
    let mut patients = Vec::new();
    let mut supervisors = Vec::new();
    for n in 0..rng.random_range(1..=6) {
        if n == 0 || rng.random_bool(0.6) {
            patients.push(fixtures::add_user(s, rng, Role::Patient, n));
        } else {
            supervisors.push(fixtures::add_user(s, rng, Role::Supervisor, n));
        }
    }
    for _ in 0..rng.random_range(0..=120) {
        let p = patients[rng.random_range(0..patients.len())];
        s.put_record(fixtures::record(rng, p)).unwrap();
    }
    for rec in s.snapshot().unwrap().records {
        if rng.random_bool(0.05) {
            s.delete_record(rec.id).unwrap();
        }
    }
    let mut at = fixtures::base();
    for &p in &patients {
        for &d in &supervisors {
            for _ in 0..rng.random_range(0..3) {
                at += Duration::minutes(7);
                if s.create_link(p, d, at).is_err() {
                    s.revoke_link(p, d, at).unwrap();
                }
            }
        }
    }
    store
}

fn fresh(sqlite: bool) -> Box<dyn Store> {
    if sqlite {
        Box::new(SqliteStore::open_in_memory().unwrap())
    } else {
        Box::new(MemoryStore::new())
    }
}

fn archives(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .map(|d| {
            d.filter_map(|e| e.ok())
                .filter(|e| !e.file_name().to_string_lossy().ends_with(".manifest.json"))
                .count()
        })
        .unwrap_or(0)
}

fn round_trips(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut stores = 0;
    for i in 0..60 {
        let source_sql = rng.random_bool(0.5);
        let source = random_store(rng, source_sql);
        let before = observe(source.as_ref());
        let tmp = tempfile::tempdir().unwrap();

        let manifest = backup_snapshot(source.as_ref(), &tmp.path().join("bk"), fixtures::base()).unwrap();
        let target = fresh(rng.random_bool(0.5));
        restore(target.as_ref(), &manifest.destination).map_err(|e| format!("store {i}: restore: {e}"))?;
        if observe(target.as_ref()) != before {
            return Err(format!("store {i}: restore(backup(s)) differs from s"));
        }
        if target.snapshot().unwrap() != source.snapshot().unwrap() {
            return Err(format!("store {i}: restored snapshot differs (ids or counters)"));
        }

        csv_io::export(source.as_ref(), &tmp.path().join("csv")).unwrap();
        let target = fresh(rng.random_bool(0.5));
        csv_io::import(target.as_ref(), &tmp.path().join("csv")).map_err(|e| format!("store {i}: import: {e}"))?;
        if observe(target.as_ref()) != before {
            return Err(format!("store {i}: import(export(s)) differs from s"));
        }
        if observe(source.as_ref()) != before {
            return Err(format!("store {i}: export mutated its source"));
        }
        stores += 1;
    }
    Ok(stores)
}

/// Polls at random instants; a backup is due exactly when some 12 h
/// boundary after the origin lies in (previous poll, this poll].
fn schedule_counts(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let interval = Duration::hours(12);
    let store: Arc<dyn Store> = Arc::new(MemoryStore::new());
    let mut runs = 0;
    for run in 0..40 {
        let tmp = tempfile::tempdir().unwrap();
        let origin = fixtures::base() + Duration::seconds(rng.random_range(0..86_400));
        let mut job = BackupJob::new(store.clone(), tmp.path().to_path_buf(), BackupSchedule::new(origin, interval).unwrap());
        let gaps = run % 2 == 1;
        let mut prev = origin;
        let mut expected = 0;
        let mut boundaries = (1..).map(|k| origin + interval * k).peekable();
        for _ in 0..rng.random_range(1..200) {
            let step = if gaps && rng.random_bool(0.1) {
                Duration::minutes(rng.random_range(12 * 60..=96 * 60))
            } else {
                Duration::seconds(rng.random_range(1..=12 * 3600))
            };
            let now = prev + step;
            let mut crossed = 0;
            while boundaries.peek().is_some_and(|b| *b <= now) {
                boundaries.next();
                crossed += 1;
            }
            if crossed > 0 {
                expected += 1;
            }
            let fired = job.tick(now).map(|r| r.unwrap()).is_some();
            if fired != (crossed > 0) {
                return Err(format!("run {run}: poll at +{}s fired={fired}, boundaries crossed={crossed}", (now - origin).num_seconds()));
            }
            prev = now;
        }
        let written = archives(tmp.path());
        if written != expected {
            return Err(format!("run {run}: {written} archives, expected {expected}"));
        }
        if !gaps {
            let floor = ((prev - origin).num_seconds() / interval.num_seconds()) as usize;
            if written != floor {
                return Err(format!("run {run}: {written} backups over {}s, floor is {floor}", (prev - origin).num_seconds()));
            }
        }
        runs += 1;
    }
    Ok(runs)
}

fn wait_for(count: impl Fn() -> usize, want: usize) -> Result<(), String> {
    let deadline = Instant::now() + StdDuration::from_secs(5);
    while count() < want {
        if Instant::now() > deadline {
            return Err(format!("scheduler thread stuck at {} of {want}", count()));
        }
        std::thread::sleep(StdDuration::from_millis(2));
    }
    std::thread::sleep(StdDuration::from_millis(30));
    if count() != want {
        return Err(format!("scheduler thread overshot: {} for {want}", count()));
    }
    Ok(())
}

fn threaded_scheduler() -> Result<(), String> {
    let tmp = tempfile::tempdir().unwrap();
    let clock = Arc::new(ManualClock::new(fixtures::base()));
    let store: Arc<dyn Store> = Arc::new(MemoryStore::new());
    let handle = spawn_backup_scheduler(
        store,
        tmp.path().to_path_buf(),
        clock.clone() as Arc<dyn Clock>,
        Duration::hours(12),
        StdDuration::from_millis(1),
    )
    .unwrap();
    wait_for(|| handle.backups_completed(), 0)?;
    clock.advance(Duration::hours(11));
    wait_for(|| handle.backups_completed(), 0)?;
    clock.advance(Duration::hours(1));
    wait_for(|| handle.backups_completed(), 1)?;
    // A 61 h outage covers five boundaries but yields one catch-up.
    clock.advance(Duration::hours(61));
    wait_for(|| handle.backups_completed(), 2)?;
    clock.advance(Duration::hours(11));
    wait_for(|| handle.backups_completed(), 3)?;
    handle.stop();
    if archives(tmp.path()) != 3 {
        return Err(format!("{} archives on disk", archives(tmp.path())));
    }
    Ok(())
}

pub fn run() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbac0_0b5e);
    let stores = round_trips(&mut rng)?;
    let runs = schedule_counts(&mut rng)?;
    threaded_scheduler()?;
    Ok(format!("{stores} random stores round-tripped, {runs} simulated schedules"))
}
