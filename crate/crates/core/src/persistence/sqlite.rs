use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, OptionalExtension, Transaction};

use crate::analytics::Window;
use crate::domain::{normalize_email, NewUser, Record, RecordId, RecordKind, Role, StoredRecord, Timestamp, UserId, UserProfile};
use crate::error::{Error, Result};
use crate::supervision::{LinkStatus, SupervisionLink};

use super::{check_record, check_replacement, kind_matches, Session, Snapshot, Store};

const SCHEMA_VERSION: i64 = 1;

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS meta (
    key   TEXT PRIMARY KEY,
    value INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS users (
    id    INTEGER PRIMARY KEY,
    email TEXT NOT NULL UNIQUE,
    role  TEXT NOT NULL,
    body  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS records (
    id      INTEGER PRIMARY KEY,
    patient INTEGER NOT NULL REFERENCES users(id),
    kind    TEXT NOT NULL,
    ts      INTEGER NOT NULL,
    body    TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS records_by_patient_ts ON records (patient, ts, id);
CREATE TABLE IF NOT EXISTS links (
    seq        INTEGER PRIMARY KEY AUTOINCREMENT,
    patient    INTEGER NOT NULL REFERENCES users(id),
    supervisor INTEGER NOT NULL REFERENCES users(id),
    created_at INTEGER NOT NULL,
    status     TEXT NOT NULL,
    revoked_at INTEGER
);
CREATE UNIQUE INDEX IF NOT EXISTS one_active_link ON links (patient, supervisor) WHERE status = 'active';
CREATE TABLE IF NOT EXISTS sessions (
    token_hash TEXT PRIMARY KEY,
    user_id    INTEGER NOT NULL REFERENCES users(id),
    issued_at  INTEGER NOT NULL,
    expires_at INTEGER NOT NULL,
    revoked    INTEGER NOT NULL DEFAULT 0
);
INSERT OR IGNORE INTO meta (key, value) VALUES ('schema_version', 1), ('next_user_id', 1), ('next_record_id', 1);
";

/// Embedded relational store backed by a single SQLite file.
pub struct SqliteStore {
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for SqliteStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SqliteStore").finish_non_exhaustive()
    }
}

fn secs(t: Timestamp) -> i64 {
    t.timestamp()
}

fn from_secs(s: i64) -> Result<Timestamp> {
    DateTime::<Utc>::from_timestamp(s, 0).ok_or_else(|| Error::Storage(format!("bad timestamp {s}")))
}

fn link_from_row(row: &rusqlite::Row<'_>) -> rusqlite::Result<(u64, u64, i64, String, Option<i64>)> {
    Ok((row.get(0)?, row.get(1)?, row.get(2)?, row.get(3)?, row.get(4)?))
}

fn build_link((patient, supervisor, created, status, revoked): (u64, u64, i64, String, Option<i64>)) -> Result<SupervisionLink> {
    Ok(SupervisionLink {
        patient: UserId(patient),
        supervisor: UserId(supervisor),
        created_at: from_secs(created)?,
        status: match status.as_str() {
            "active" => LinkStatus::Active,
            "revoked" => LinkStatus::Revoked,
            other => return Err(Error::Storage(format!("bad link status {other}"))),
        },
        revoked_at: revoked.map(from_secs).transpose()?,
    })
}

impl SqliteStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::init(Connection::open(path)?)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.pragma_update(None, "journal_mode", "WAL").ok();
        conn.execute_batch(SCHEMA)?;
        let version: i64 = conn.query_row("SELECT value FROM meta WHERE key = 'schema_version'", [], |r| r.get(0))?;
        if version != SCHEMA_VERSION {
            return Err(Error::Storage(format!(
                "unsupported schema version {version}, expected {SCHEMA_VERSION}"
            )));
        }
        Ok(SqliteStore { conn: Mutex::new(conn) })
    }

    fn conn(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().expect("store lock poisoned")
    }

    fn counter(tx: &Transaction<'_>, key: &str) -> Result<u64> {
        Ok(tx.query_row("SELECT value FROM meta WHERE key = ?1", [key], |r| r.get::<_, i64>(0))? as u64)
    }

    fn set_counter(tx: &Transaction<'_>, key: &str, value: u64) -> Result<()> {
        tx.execute("UPDATE meta SET value = ?2 WHERE key = ?1", params![key, value as i64])?;
        Ok(())
    }

    fn role_of(conn: &Connection, id: UserId) -> Result<Option<Role>> {
        let role: Option<String> = conn
            .query_row("SELECT role FROM users WHERE id = ?1", [id.0], |r| r.get(0))
            .optional()?;
        role.map(|r| r.parse()).transpose()
    }

    fn user_in(conn: &Connection, id: UserId) -> Result<Option<UserProfile>> {
        let body: Option<String> = conn
            .query_row("SELECT body FROM users WHERE id = ?1", [id.0], |r| r.get(0))
            .optional()?;
        Ok(body.map(|b| serde_json::from_str(&b)).transpose()?)
    }

    fn record_in(conn: &Connection, id: RecordId) -> Result<Option<StoredRecord>> {
        let body: Option<String> = conn
            .query_row("SELECT body FROM records WHERE id = ?1", [id.0], |r| r.get(0))
            .optional()?;
        Ok(body
            .map(|b| serde_json::from_str(&b))
            .transpose()?
            .map(|record| StoredRecord { id, record }))
    }

    fn insert_user(tx: &Transaction<'_>, p: &UserProfile) -> Result<()> {
        tx.execute(
            "INSERT INTO users (id, email, role, body) VALUES (?1, ?2, ?3, ?4)",
            params![p.id.0, p.email, p.role.as_str(), serde_json::to_string(p)?],
        )?;
        Ok(())
    }

    fn insert_record(tx: &Transaction<'_>, r: &StoredRecord) -> Result<()> {
        tx.execute(
            "INSERT INTO records (id, patient, kind, ts, body) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![
                r.id.0,
                r.record.patient().0,
                r.record.kind().as_str(),
                secs(r.record.timestamp()),
                serde_json::to_string(&r.record)?
            ],
        )?;
        Ok(())
    }

    fn insert_link(tx: &Transaction<'_>, l: &SupervisionLink) -> Result<()> {
        tx.execute(
            "INSERT INTO links (patient, supervisor, created_at, status, revoked_at) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![l.patient.0, l.supervisor.0, secs(l.created_at), l.status.as_str(), l.revoked_at.map(secs)],
        )?;
        Ok(())
    }

    fn links_where(&self, column: &str, id: UserId) -> Result<Vec<SupervisionLink>> {
        let conn = self.conn();
        let sql = format!(
            "SELECT patient, supervisor, created_at, status, revoked_at FROM links WHERE {column} = ?1 ORDER BY seq"
        );
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map([id.0], link_from_row)?;
        rows.map(|r| build_link(r?)).collect()
    }
}

impl Store for SqliteStore {
    fn create_user(&self, user: NewUser) -> Result<UserProfile> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let id = Self::counter(&tx, "next_user_id")?;
        let profile = user.into_profile(UserId(id));
        profile.validate()?;
        let taken: bool = tx
            .query_row("SELECT 1 FROM users WHERE email = ?1", [&profile.email], |_| Ok(()))
            .optional()?
            .is_some();
        if taken {
            return Err(Error::Conflict("email_taken"));
        }
        Self::insert_user(&tx, &profile)?;
        Self::set_counter(&tx, "next_user_id", id + 1)?;
        tx.commit()?;
        Ok(profile)
    }

    fn user(&self, id: UserId) -> Result<UserProfile> {
        Self::user_in(&self.conn(), id)?.ok_or(Error::NotFound("user"))
    }

    fn user_by_email(&self, email: &str) -> Result<Option<UserProfile>> {
        let conn = self.conn();
        let body: Option<String> = conn
            .query_row("SELECT body FROM users WHERE email = ?1", [normalize_email(email)], |r| r.get(0))
            .optional()?;
        Ok(body.map(|b| serde_json::from_str(&b)).transpose()?)
    }

    fn update_user(&self, profile: &UserProfile) -> Result<()> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let existing = Self::user_in(&tx, profile.id)?.ok_or(Error::NotFound("user"))?;
        if existing.role != profile.role {
            return Err(Error::invalid("profile.role_changed", "a user cannot change role"));
        }
        profile.validate()?;
        if existing.email != profile.email {
            let taken = tx
                .query_row("SELECT 1 FROM users WHERE email = ?1", [&profile.email], |_| Ok(()))
                .optional()?
                .is_some();
            if taken {
                return Err(Error::Conflict("email_taken"));
            }
        }
        tx.execute(
            "UPDATE users SET email = ?2, body = ?3 WHERE id = ?1",
            params![profile.id.0, profile.email, serde_json::to_string(profile)?],
        )?;
        tx.commit()?;
        Ok(())
    }

    fn users(&self) -> Result<Vec<UserProfile>> {
        let conn = self.conn();
        let mut stmt = conn.prepare("SELECT body FROM users ORDER BY id")?;
        let rows = stmt.query_map([], |r| r.get::<_, String>(0))?;
        rows.map(|b| Ok(serde_json::from_str(&b?)?)).collect()
    }

    fn put_record(&self, record: Record) -> Result<StoredRecord> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        check_record(&record, Self::role_of(&tx, record.patient())?)?;
        let id = Self::counter(&tx, "next_record_id")?;
        let stored = StoredRecord { id: RecordId(id), record };
        Self::insert_record(&tx, &stored)?;
        Self::set_counter(&tx, "next_record_id", id + 1)?;
        tx.commit()?;
        Ok(stored)
    }

    fn get_record(&self, id: RecordId) -> Result<StoredRecord> {
        Self::record_in(&self.conn(), id)?.ok_or(Error::NotFound("record"))
    }

    fn update_record(&self, id: RecordId, record: Record) -> Result<StoredRecord> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let existing = Self::record_in(&tx, id)?.ok_or(Error::NotFound("record"))?;
        check_replacement(&existing.record, &record)?;
        check_record(&record, Self::role_of(&tx, record.patient())?)?;
        tx.execute(
            "UPDATE records SET ts = ?2, body = ?3 WHERE id = ?1",
            params![id.0, secs(record.timestamp()), serde_json::to_string(&record)?],
        )?;
        tx.commit()?;
        Ok(StoredRecord { id, record })
    }

    fn delete_record(&self, id: RecordId) -> Result<()> {
        let n = self.conn().execute("DELETE FROM records WHERE id = ?1", [id.0])?;
        if n == 0 {
            return Err(Error::NotFound("record"));
        }
        Ok(())
    }

    fn query_records(&self, patient: UserId, kinds: &[RecordKind], window: &Window) -> Result<Vec<StoredRecord>> {
        let conn = self.conn();
        let mut stmt = conn.prepare_cached(
            "SELECT id, kind, body FROM records WHERE patient = ?1 AND ts >= ?2 AND ts < ?3 ORDER BY ts, id",
        )?;
        let rows = stmt.query_map(params![patient.0, secs(window.start()), secs(window.end())], |r| {
            Ok((r.get::<_, u64>(0)?, r.get::<_, String>(1)?, r.get::<_, String>(2)?))
        })?;
        let mut out = Vec::new();
        for row in rows {
            let (id, kind, body) = row?;
            if !kind_matches(kinds, kind.parse()?) {
                continue;
            }
            let record: Record = serde_json::from_str(&body)?;
            // Sub-second timestamps never reach the table, but stay exact.
            if window.contains(record.timestamp()) {
                out.push(StoredRecord { id: RecordId(id), record });
            }
        }
        Ok(out)
    }

    fn create_link(&self, patient: UserId, supervisor: UserId, at: Timestamp) -> Result<SupervisionLink> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        if Self::role_of(&tx, patient)?.is_none() || Self::role_of(&tx, supervisor)?.is_none() {
            return Err(Error::NotFound("user"));
        }
        let active = tx
            .query_row(
                "SELECT 1 FROM links WHERE patient = ?1 AND supervisor = ?2 AND status = 'active'",
                params![patient.0, supervisor.0],
                |_| Ok(()),
            )
            .optional()?
            .is_some();
        if active {
            return Err(Error::Conflict("link_exists"));
        }
        let link = SupervisionLink {
            patient,
            supervisor,
            created_at: at,
            status: LinkStatus::Active,
            revoked_at: None,
        };
        Self::insert_link(&tx, &link)?;
        tx.commit()?;
        Ok(link)
    }

    fn revoke_link(&self, patient: UserId, supervisor: UserId, at: Timestamp) -> Result<SupervisionLink> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let row = tx
            .query_row(
                "SELECT seq, created_at FROM links WHERE patient = ?1 AND supervisor = ?2 AND status = 'active'",
                params![patient.0, supervisor.0],
                |r| Ok((r.get::<_, i64>(0)?, r.get::<_, i64>(1)?)),
            )
            .optional()?;
        let (seq, created) = row.ok_or(Error::NotFound("link"))?;
        tx.execute(
            "UPDATE links SET status = 'revoked', revoked_at = ?2 WHERE seq = ?1",
            params![seq, secs(at)],
        )?;
        tx.commit()?;
        Ok(SupervisionLink {
            patient,
            supervisor,
            created_at: from_secs(created)?,
            status: LinkStatus::Revoked,
            revoked_at: Some(at),
        })
    }

    fn links_of_patient(&self, patient: UserId) -> Result<Vec<SupervisionLink>> {
        self.links_where("patient", patient)
    }

    fn links_of_supervisor(&self, supervisor: UserId) -> Result<Vec<SupervisionLink>> {
        self.links_where("supervisor", supervisor)
    }

    fn has_active_link(&self, patient: UserId, supervisor: UserId) -> Result<bool> {
        Ok(self
            .conn()
            .query_row(
                "SELECT 1 FROM links WHERE patient = ?1 AND supervisor = ?2 AND status = 'active'",
                params![patient.0, supervisor.0],
                |_| Ok(()),
            )
            .optional()?
            .is_some())
    }

    fn create_session(&self, s: &Session) -> Result<()> {
        let conn = self.conn();
        if Self::role_of(&conn, s.user)?.is_none() {
            return Err(Error::NotFound("user"));
        }
        let n = conn.execute(
            "INSERT OR IGNORE INTO sessions (token_hash, user_id, issued_at, expires_at, revoked) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![s.token_hash, s.user.0, secs(s.issued_at), secs(s.expires_at), s.revoked],
        )?;
        if n == 0 {
            return Err(Error::Conflict("session_exists"));
        }
        Ok(())
    }

    fn session(&self, token_hash: &str) -> Result<Option<Session>> {
        let row = self
            .conn()
            .query_row(
                "SELECT user_id, issued_at, expires_at, revoked FROM sessions WHERE token_hash = ?1",
                [token_hash],
                |r| Ok((r.get::<_, u64>(0)?, r.get::<_, i64>(1)?, r.get::<_, i64>(2)?, r.get::<_, bool>(3)?)),
            )
            .optional()?;
        row.map(|(user, issued, expires, revoked)| {
            Ok(Session {
                token_hash: token_hash.to_string(),
                user: UserId(user),
                issued_at: from_secs(issued)?,
                expires_at: from_secs(expires)?,
                revoked,
            })
        })
        .transpose()
    }

    fn revoke_session(&self, token_hash: &str) -> Result<bool> {
        let n = self.conn().execute(
            "UPDATE sessions SET revoked = 1 WHERE token_hash = ?1 AND revoked = 0",
            [token_hash],
        )?;
        Ok(n > 0)
    }

    fn snapshot(&self) -> Result<Snapshot> {
        let mut conn = self.conn();
        // One read transaction so the snapshot is self-consistent.
        let tx = conn.transaction()?;
        let users = {
            let mut stmt = tx.prepare("SELECT body FROM users ORDER BY id")?;
            let rows = stmt.query_map([], |r| r.get::<_, String>(0))?;
            rows.map(|b| Ok(serde_json::from_str(&b?)?)).collect::<Result<Vec<UserProfile>>>()?
        };
        let records = {
            let mut stmt = tx.prepare("SELECT id, body FROM records ORDER BY id")?;
            let rows = stmt.query_map([], |r| Ok((r.get::<_, u64>(0)?, r.get::<_, String>(1)?)))?;
            rows.map(|row| {
                let (id, body) = row?;
                Ok(StoredRecord {
                    id: RecordId(id),
                    record: serde_json::from_str(&body)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
        };
        let links = {
            let mut stmt =
                tx.prepare("SELECT patient, supervisor, created_at, status, revoked_at FROM links ORDER BY seq")?;
            let rows = stmt.query_map([], link_from_row)?;
            rows.map(|r| build_link(r?)).collect::<Result<Vec<_>>>()?
        };
        let next_user_id = Self::counter(&tx, "next_user_id")?;
        let next_record_id = Self::counter(&tx, "next_record_id")?;
        tx.commit()?;
        Ok(Snapshot {
            users,
            records,
            links,
            next_user_id,
            next_record_id,
        })
    }

    fn load_snapshot(&self, snapshot: Snapshot) -> Result<()> {
        snapshot.check()?;
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let occupied: i64 = tx.query_row(
            "SELECT (SELECT COUNT(*) FROM users) + (SELECT COUNT(*) FROM records) + (SELECT COUNT(*) FROM links)",
            [],
            |r| r.get(0),
        )?;
        if occupied > 0 {
            return Err(Error::Conflict("store_not_empty"));
        }
        for u in &snapshot.users {
            Self::insert_user(&tx, u)?;
        }
        for r in &snapshot.records {
            Self::insert_record(&tx, r)?;
        }
        for l in &snapshot.links {
            Self::insert_link(&tx, l)?;
        }
        Self::set_counter(&tx, "next_user_id", snapshot.next_user_id.max(1))?;
        Self::set_counter(&tx, "next_record_id", snapshot.next_record_id.max(1))?;
        tx.commit()?;
        Ok(())
    }
}
