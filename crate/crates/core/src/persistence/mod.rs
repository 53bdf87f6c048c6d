//! Storage behind a pluggable [`Store`] trait, plus backups.
//!
//! Two stores are provided: [`MemoryStore`] for tests and ephemeral runs,
//! and [`SqliteStore`], an embedded file-backed relational store for
//! deployments. Both enforce the same contract:
//!
//! - records and profiles are validated before they are written;
//! - every record references an existing patient and every link two
//!   existing users;
//! - identifiers are assigned monotonically and never reused;
//! - a failed mutation leaves the store unchanged.

mod backup;
mod memory;
mod scheduler;
#[cfg(feature = "sqlite")]
mod sqlite;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::Window;
use crate::domain::{NewUser, Record, RecordId, RecordKind, Role, StoredRecord, Timestamp, UserId, UserProfile};
use crate::error::{Error, Result};
use crate::supervision::SupervisionLink;

pub use backup::{backup_snapshot, read_archive, restore, BackupManifest, ARCHIVE_MAGIC, ARCHIVE_VERSION};
pub use memory::MemoryStore;
pub use scheduler::{spawn_backup_scheduler, BackupJob, BackupSchedule, SchedulerHandle, DEFAULT_BACKUP_INTERVAL};
#[cfg(feature = "sqlite")]
pub use sqlite::SqliteStore;

/// A login session. Only a hash of the bearer token is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token_hash: String,
    pub user: UserId,
    pub issued_at: Timestamp,
    pub expires_at: Timestamp,
    pub revoked: bool,
}

/// The complete durable state of a store, minus sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Snapshot {
    pub users: Vec<UserProfile>,
    pub records: Vec<StoredRecord>,
    pub links: Vec<SupervisionLink>,
    pub next_user_id: u64,
    pub next_record_id: u64,
}

impl Snapshot {
    /// Per-type live counts: `users`, `links` and one entry per record kind.
    pub fn counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        counts.insert("users".to_string(), self.users.len() as u64);
        counts.insert("links".to_string(), self.links.len() as u64);
        for kind in RecordKind::ALL {
            counts.insert(kind.as_str().to_string(), 0);
        }
        for r in &self.records {
            *counts.entry(r.record.kind().as_str().to_string()).or_default() += 1;
        }
        counts
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty() && self.records.is_empty() && self.links.is_empty()
    }

    /// Structural checks used before loading: unique ids, counters past
    /// every id, referential integrity, valid contents.
    pub(crate) fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Archive(m));
        let mut roles = BTreeMap::new();
        let mut emails = std::collections::BTreeSet::new();
        for u in &self.users {
            u.validate()?;
            if roles.insert(u.id, u.role).is_some() {
                return bad(format!("duplicate user id {}", u.id));
            }
            if !emails.insert(u.email.as_str()) {
                return bad(format!("duplicate email {}", u.email));
            }
            if u.id.0 >= self.next_user_id {
                return bad(format!("user id {} not below counter", u.id));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for r in &self.records {
            check_record(&r.record, roles.get(&r.record.patient()).copied())?;
            if !ids.insert(r.id) {
                return bad(format!("duplicate record id {}", r.id));
            }
            if r.id.0 >= self.next_record_id {
                return bad(format!("record id {} not below counter", r.id));
            }
        }
        let mut active = std::collections::BTreeSet::new();
        for l in &self.links {
            if roles.get(&l.patient) != Some(&Role::Patient) || roles.get(&l.supervisor) != Some(&Role::Supervisor) {
                return bad(format!("link {}->{} references invalid users", l.patient, l.supervisor));
            }
            if l.is_active() && !active.insert((l.patient, l.supervisor)) {
                return bad(format!("two active links for {}->{}", l.patient, l.supervisor));
            }
        }
        Ok(())
    }
}

/// Durable storage for profiles, records, links and sessions.
///
/// All mutations are atomic: on error nothing has been written.
pub trait Store: Send + Sync {
    fn create_user(&self, user: NewUser) -> Result<UserProfile>;
    fn user(&self, id: UserId) -> Result<UserProfile>;
    /// Looks up by normalized email.
    fn user_by_email(&self, email: &str) -> Result<Option<UserProfile>>;
    fn update_user(&self, profile: &UserProfile) -> Result<()>;
    /// All users, ascending by id.
    fn users(&self) -> Result<Vec<UserProfile>>;

    fn put_record(&self, record: Record) -> Result<StoredRecord>;
    fn get_record(&self, id: RecordId) -> Result<StoredRecord>;
    /// Replaces the body of an existing record; kind and patient are fixed.
    fn update_record(&self, id: RecordId, record: Record) -> Result<StoredRecord>;
    fn delete_record(&self, id: RecordId) -> Result<()>;
    /// Records of `patient` whose kind is in `kinds` (all kinds when empty)
    /// and whose timestamp lies in `window`, ascending by timestamp then id.
    fn query_records(&self, patient: UserId, kinds: &[RecordKind], window: &Window) -> Result<Vec<StoredRecord>>;

    /// Creates an active link; `Conflict("link_exists")` if one is active.
    fn create_link(&self, patient: UserId, supervisor: UserId, at: Timestamp) -> Result<SupervisionLink>;
    /// Revokes the active link; `NotFound("link")` if none.
    fn revoke_link(&self, patient: UserId, supervisor: UserId, at: Timestamp) -> Result<SupervisionLink>;
    /// All links of a patient, active and revoked, in creation order.
    fn links_of_patient(&self, patient: UserId) -> Result<Vec<SupervisionLink>>;
    fn links_of_supervisor(&self, supervisor: UserId) -> Result<Vec<SupervisionLink>>;
    fn has_active_link(&self, patient: UserId, supervisor: UserId) -> Result<bool>;

    fn create_session(&self, session: &Session) -> Result<()>;
    fn session(&self, token_hash: &str) -> Result<Option<Session>>;
    /// Marks a session revoked; returns whether it was live.
    fn revoke_session(&self, token_hash: &str) -> Result<bool>;

    fn snapshot(&self) -> Result<Snapshot>;
    /// Loads a snapshot into an empty store, keeping ids and counters.
    fn load_snapshot(&self, snapshot: Snapshot) -> Result<()>;

    fn counts(&self) -> Result<BTreeMap<String, u64>> {
        Ok(self.snapshot()?.counts())
    }
}

/// Shared write-time checks for records.
pub(crate) fn check_record(record: &Record, patient_role: Option<Role>) -> Result<()> {
    let violations = record.violations();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    match patient_role {
        None => Err(Error::NotFound("patient")),
        Some(Role::Supervisor) => Err(Error::invalid(
            "record.owner_not_patient",
            "records belong to patients",
        )),
        Some(Role::Patient) => Ok(()),
    }
}

pub(crate) fn check_replacement(existing: &Record, replacement: &Record) -> Result<()> {
    if existing.kind() != replacement.kind() {
        return Err(Error::invalid("record.kind_changed", "a record cannot change kind"));
    }
    if existing.patient() != replacement.patient() {
        return Err(Error::invalid("record.patient_changed", "a record cannot change owner"));
    }
    Ok(())
}

pub(crate) fn kind_matches(kinds: &[RecordKind], kind: RecordKind) -> bool {
    kinds.is_empty() || kinds.contains(&kind)
}
