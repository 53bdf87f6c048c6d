//! Backup archives.
//!
//! An archive is a UTF-8 text file of newline-terminated lines:
//!
//! ```text
//! glycotrack-backup 1
//! {"type":"meta","created_at":"2024-03-04T12:00:00Z","next_user_id":3,"next_record_id":9,"counts":{...}}
//! {"type":"user","data":{...}}        one per user, ascending id
//! {"type":"record","data":{...}}      one per record, ascending id
//! {"type":"link","data":{...}}        one per link, creation order
//! sha256 <64 lowercase hex digits>
//! ```
//!
//! The digest covers every byte before the final line. Sessions are not
//! archived. See `docs/backup-format.md` for the field-level description.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{StoredRecord, Timestamp, UserProfile};
use crate::error::{Error, Result};
use crate::supervision::SupervisionLink;

use super::{Snapshot, Store};

pub const ARCHIVE_MAGIC: &str = "glycotrack-backup";
pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackupManifest {
    pub created_at: Timestamp,
    /// Path of the archive file.
    pub destination: PathBuf,
    pub record_counts: BTreeMap<String, u64>,
    /// Lowercase hex SHA-256 of the archive body.
    pub checksum: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Meta {
        created_at: Timestamp,
        next_user_id: u64,
        next_record_id: u64,
        counts: BTreeMap<String, u64>,
    },
    User {
        data: UserProfile,
    },
    Record {
        data: StoredRecord,
    },
    Link {
        data: SupervisionLink,
    },
}

fn encode(snapshot: &Snapshot, created_at: Timestamp) -> Result<(String, String)> {
    let mut body = format!("{ARCHIVE_MAGIC} {ARCHIVE_VERSION}\n");
    let mut push = |line: &Line| -> Result<()> {
        body.push_str(&serde_json::to_string(line)?);
        body.push('\n');
        Ok(())
    };
    push(&Line::Meta {
        created_at,
        next_user_id: snapshot.next_user_id,
        next_record_id: snapshot.next_record_id,
        counts: snapshot.counts(),
    })?;
    for u in &snapshot.users {
        push(&Line::User { data: u.clone() })?;
    }
    for r in &snapshot.records {
        push(&Line::Record { data: r.clone() })?;
    }
    for l in &snapshot.links {
        push(&Line::Link { data: l.clone() })?;
    }
    let checksum = hex::encode(Sha256::digest(body.as_bytes()));
    body.push_str(&format!("sha256 {checksum}\n"));
    Ok((body, checksum))
}

fn archive_name(created_at: Timestamp) -> String {
    format!("glycotrack-backup-{}.jsonl", created_at.format("%Y%m%dT%H%M%SZ"))
}

/// Writes a full archive of `store` into the directory `destination`.
///
/// The archive is written to a temporary file and renamed into place, so a
/// failure never leaves a truncated archive behind. A manifest copy is
/// written next to it as `<archive>.manifest.json`.
pub fn backup_snapshot(store: &dyn Store, destination: &Path, now: Timestamp) -> Result<BackupManifest> {
    let snapshot = store.snapshot()?;
    let (body, checksum) = encode(&snapshot, now)?;

    fs::create_dir_all(destination)?;
    let mut path = destination.join(archive_name(now));
    let mut n = 1;
    while path.exists() {
        path = destination.join(format!("{}.{n}", archive_name(now)));
        n += 1;
    }
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;

    let manifest = BackupManifest {
        created_at: now,
        destination: path.clone(),
        record_counts: snapshot.counts(),
        checksum,
    };
    let mut manifest_path = path.into_os_string();
    manifest_path.push(".manifest.json");
    fs::write(manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Parses and verifies an archive: header, checksum, line structure and
/// declared counts.
pub fn read_archive(path: &Path) -> Result<(Snapshot, BackupManifest)> {
    let text = fs::read_to_string(path)?;
    let bad = |m: &str| Error::Archive(m.to_string());

    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| bad("archive too short"))?;
    let (body, trailer) = text.split_at(body_end);
    let declared = trailer
        .trim_end_matches('\n')
        .strip_prefix("sha256 ")
        .ok_or_else(|| bad("missing checksum trailer"))?;
    let actual = hex::encode(Sha256::digest(body.as_bytes()));
    if declared != actual {
        return Err(bad("checksum mismatch"));
    }

    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| bad("missing header"))?;
    let version = header
        .strip_prefix(ARCHIVE_MAGIC)
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| bad("not a glycotrack backup"))?;
    if version != ARCHIVE_VERSION {
        return Err(Error::Archive(format!("unsupported archive version {version}")));
    }

    let Some(Ok(Line::Meta {
        created_at,
        next_user_id,
        next_record_id,
        counts,
    })) = lines.next().map(serde_json::from_str::<Line>)
    else {
        return Err(bad("missing meta line"));
    };

    let mut snapshot = Snapshot {
        next_user_id,
        next_record_id,
        ..Snapshot::default()
    };
    for (i, line) in lines.enumerate() {
        let parsed: Line = serde_json::from_str(line)
            .map_err(|e| Error::Archive(format!("line {}: {e}", i + 3)))?;
        match parsed {
            Line::User { data } => snapshot.users.push(data),
            Line::Record { data } => snapshot.records.push(data),
            Line::Link { data } => snapshot.links.push(data),
            Line::Meta { .. } => return Err(Error::Archive(format!("line {}: duplicate meta", i + 3))),
        }
    }
    if snapshot.counts() != counts {
        return Err(bad("declared counts do not match contents"));
    }
    let manifest = BackupManifest {
        created_at,
        destination: path.to_path_buf(),
        record_counts: counts,
        checksum: actual,
    };
    Ok((snapshot, manifest))
}

/// Loads a verified archive into an empty store.
pub fn restore(store: &dyn Store, archive: &Path) -> Result<BackupManifest> {
    let (snapshot, manifest) = read_archive(archive)?;
    store.load_snapshot(snapshot)?;
    Ok(manifest)
}
