use std::collections::{BTreeMap, HashMap};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use crate::analytics::Window;
use crate::domain::{normalize_email, NewUser, Record, RecordId, RecordKind, StoredRecord, Timestamp, UserId, UserProfile};
use crate::error::{Error, Result};
use crate::supervision::{LinkStatus, SupervisionLink};

use super::{check_record, check_replacement, kind_matches, Session, Snapshot, Store};

#[derive(Debug)]
struct State {
    users: BTreeMap<UserId, UserProfile>,
    emails: HashMap<String, UserId>,
    records: BTreeMap<RecordId, StoredRecord>,
    links: Vec<SupervisionLink>,
    sessions: HashMap<String, Session>,
    next_user_id: u64,
    next_record_id: u64,
}

impl Default for State {
    fn default() -> Self {
        State {
            users: BTreeMap::new(),
            emails: HashMap::new(),
            records: BTreeMap::new(),
            links: Vec::new(),
            sessions: HashMap::new(),
            next_user_id: 1,
            next_record_id: 1,
        }
    }
}

/// Process-local store. Concurrent readers, one writer at a time.
#[derive(Debug, Default)]
pub struct MemoryStore {
    state: RwLock<State>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().expect("store lock poisoned")
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.state.write().expect("store lock poisoned")
    }
}

impl State {
    fn patient_role(&self, record: &Record) -> Option<crate::domain::Role> {
        self.users.get(&record.patient()).map(|u| u.role)
    }
}

impl Store for MemoryStore {
    fn create_user(&self, user: NewUser) -> Result<UserProfile> {
        let mut st = self.write();
        let profile = user.into_profile(UserId(st.next_user_id));
        profile.validate()?;
        if st.emails.contains_key(&profile.email) {
            return Err(Error::Conflict("email_taken"));
        }
        st.next_user_id += 1;
        st.emails.insert(profile.email.clone(), profile.id);
        st.users.insert(profile.id, profile.clone());
        Ok(profile)
    }

    fn user(&self, id: UserId) -> Result<UserProfile> {
        self.read().users.get(&id).cloned().ok_or(Error::NotFound("user"))
    }

    fn user_by_email(&self, email: &str) -> Result<Option<UserProfile>> {
        let st = self.read();
        Ok(st
            .emails
            .get(&normalize_email(email))
            .and_then(|id| st.users.get(id))
            .cloned())
    }

    fn update_user(&self, profile: &UserProfile) -> Result<()> {
        let mut st = self.write();
        let existing = st.users.get(&profile.id).ok_or(Error::NotFound("user"))?;
        if existing.role != profile.role {
            return Err(Error::invalid("profile.role_changed", "a user cannot change role"));
        }
        profile.validate()?;
        let old_email = existing.email.clone();
        if old_email != profile.email {
            if st.emails.contains_key(&profile.email) {
                return Err(Error::Conflict("email_taken"));
            }
            st.emails.remove(&old_email);
            st.emails.insert(profile.email.clone(), profile.id);
        }
        st.users.insert(profile.id, profile.clone());
        Ok(())
    }

    fn users(&self) -> Result<Vec<UserProfile>> {
        Ok(self.read().users.values().cloned().collect())
    }

    fn put_record(&self, record: Record) -> Result<StoredRecord> {
        let mut st = self.write();
        check_record(&record, st.patient_role(&record))?;
        let stored = StoredRecord {
            id: RecordId(st.next_record_id),
            record,
        };
        st.next_record_id += 1;
        st.records.insert(stored.id, stored.clone());
        Ok(stored)
    }

    fn get_record(&self, id: RecordId) -> Result<StoredRecord> {
        self.read().records.get(&id).cloned().ok_or(Error::NotFound("record"))
    }

    fn update_record(&self, id: RecordId, record: Record) -> Result<StoredRecord> {
        let mut st = self.write();
        let existing = st.records.get(&id).ok_or(Error::NotFound("record"))?;
        check_replacement(&existing.record, &record)?;
        check_record(&record, st.patient_role(&record))?;
        let stored = StoredRecord { id, record };
        st.records.insert(id, stored.clone());
        Ok(stored)
    }

    fn delete_record(&self, id: RecordId) -> Result<()> {
        self.write()
            .records
            .remove(&id)
            .map(drop)
            .ok_or(Error::NotFound("record"))
    }

    fn query_records(&self, patient: UserId, kinds: &[RecordKind], window: &Window) -> Result<Vec<StoredRecord>> {
        let st = self.read();
        let mut out: Vec<StoredRecord> = st
            .records
            .values()
            .filter(|r| {
                r.record.patient() == patient
                    && kind_matches(kinds, r.record.kind())
                    && window.contains(r.record.timestamp())
            })
            .cloned()
            .collect();
        // Values iterate in id order, so a stable sort keeps ids ascending on ties.
        out.sort_by_key(|r| r.record.timestamp());
        Ok(out)
    }

    fn create_link(&self, patient: UserId, supervisor: UserId, at: Timestamp) -> Result<SupervisionLink> {
        let mut st = self.write();
        if !st.users.contains_key(&patient) || !st.users.contains_key(&supervisor) {
            return Err(Error::NotFound("user"));
        }
        if st
            .links
            .iter()
            .any(|l| l.patient == patient && l.supervisor == supervisor && l.is_active())
        {
            return Err(Error::Conflict("link_exists"));
        }
        let link = SupervisionLink {
            patient,
            supervisor,
            created_at: at,
            status: LinkStatus::Active,
            revoked_at: None,
        };
        st.links.push(link.clone());
        Ok(link)
    }

    fn revoke_link(&self, patient: UserId, supervisor: UserId, at: Timestamp) -> Result<SupervisionLink> {
        let mut st = self.write();
        let link = st
            .links
            .iter_mut()
            .find(|l| l.patient == patient && l.supervisor == supervisor && l.is_active())
            .ok_or(Error::NotFound("link"))?;
        link.status = LinkStatus::Revoked;
        link.revoked_at = Some(at);
        Ok(link.clone())
    }

    fn links_of_patient(&self, patient: UserId) -> Result<Vec<SupervisionLink>> {
        Ok(self.read().links.iter().filter(|l| l.patient == patient).cloned().collect())
    }

    fn links_of_supervisor(&self, supervisor: UserId) -> Result<Vec<SupervisionLink>> {
        Ok(self
            .read()
            .links
            .iter()
            .filter(|l| l.supervisor == supervisor)
            .cloned()
            .collect())
    }

    fn has_active_link(&self, patient: UserId, supervisor: UserId) -> Result<bool> {
        Ok(self
            .read()
            .links
            .iter()
            .any(|l| l.patient == patient && l.supervisor == supervisor && l.is_active()))
    }

    fn create_session(&self, session: &Session) -> Result<()> {
        let mut st = self.write();
        if !st.users.contains_key(&session.user) {
            return Err(Error::NotFound("user"));
        }
        if st.sessions.contains_key(&session.token_hash) {
            return Err(Error::Conflict("session_exists"));
        }
        st.sessions.insert(session.token_hash.clone(), session.clone());
        Ok(())
    }

    fn session(&self, token_hash: &str) -> Result<Option<Session>> {
        Ok(self.read().sessions.get(token_hash).cloned())
    }

    fn revoke_session(&self, token_hash: &str) -> Result<bool> {
        let mut st = self.write();
        Ok(match st.sessions.get_mut(token_hash) {
            Some(s) if !s.revoked => {
                s.revoked = true;
                true
            }
            _ => false,
        })
    }

    fn snapshot(&self) -> Result<Snapshot> {
        let st = self.read();
        Ok(Snapshot {
            users: st.users.values().cloned().collect(),
            records: st.records.values().cloned().collect(),
            links: st.links.clone(),
            next_user_id: st.next_user_id,
            next_record_id: st.next_record_id,
        })
    }

    fn load_snapshot(&self, snapshot: Snapshot) -> Result<()> {
        snapshot.check()?;
        let mut st = self.write();
        if !st.users.is_empty() || !st.records.is_empty() || !st.links.is_empty() {
            return Err(Error::Conflict("store_not_empty"));
        }
        let mut fresh = State {
            next_user_id: snapshot.next_user_id.max(1),
            next_record_id: snapshot.next_record_id.max(1),
            links: snapshot.links,
            sessions: std::mem::take(&mut st.sessions),
            ..State::default()
        };
        for u in snapshot.users {
            fresh.emails.insert(u.email.clone(), u.id);
            fresh.users.insert(u.id, u);
        }
        for r in snapshot.records {
            fresh.records.insert(r.id, r);
        }
        *st = fresh;
        Ok(())
    }
}
