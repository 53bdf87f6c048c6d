//! Patient/supervisor links and the access rule built on them.
//!
//! A supervisor linked to a patient by an active link may read that
//! patient's data and nothing more. Users always have full access to their
//! own data. Links are created by the patient, take effect immediately and
//! are kept (as revoked) after dissociation.

use serde::{Deserialize, Serialize};

use crate::domain::{Role, Timestamp, UserId, UserProfile};
use crate::error::{Error, Result};
use crate::persistence::Store;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStatus {
    Active,
    Revoked,
}

impl LinkStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkStatus::Active => "active",
            LinkStatus::Revoked => "revoked",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupervisionLink {
    pub patient: UserId,
    pub supervisor: UserId,
    pub created_at: Timestamp,
    pub status: LinkStatus,
    pub revoked_at: Option<Timestamp>,
}

impl SupervisionLink {
    pub fn is_active(&self) -> bool {
        self.status == LinkStatus::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenyReason {
    /// No active link between the actor and the subject.
    NoLink,
    /// The actor supervises the subject, but supervision grants reads only.
    SupervisorReadOnly,
}

impl DenyReason {
    pub fn code(self) -> &'static str {
        match self {
            DenyReason::NoLink => "no_link",
            DenyReason::SupervisorReadOnly => "supervisor_read_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "decision", content = "reason")]
pub enum AccessDecision {
    Allow,
    Deny(DenyReason),
}

impl AccessDecision {
    pub fn is_allowed(self) -> bool {
        self == AccessDecision::Allow
    }

    /// Turns a denial into [`Error::Forbidden`] carrying the reason code.
    pub fn require(self) -> Result<()> {
        match self {
            AccessDecision::Allow => Ok(()),
            AccessDecision::Deny(reason) => Err(Error::Forbidden(reason.code())),
        }
    }
}

/// The access rule itself, independent of storage.
pub fn decide(actor: UserId, subject: UserId, action: Action, active_link: bool) -> AccessDecision {
    if actor == subject {
        return AccessDecision::Allow;
    }
    match (action, active_link) {
        (Action::Read, true) => AccessDecision::Allow,
        (Action::Write, true) => AccessDecision::Deny(DenyReason::SupervisorReadOnly),
        (_, false) => AccessDecision::Deny(DenyReason::NoLink),
    }
}

/// Public view of a user, as returned by searches and link listings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSummary {
    pub id: UserId,
    pub display_name: String,
    pub email: String,
}

impl From<&UserProfile> for UserSummary {
    fn from(p: &UserProfile) -> Self {
        UserSummary {
            id: p.id,
            display_name: p.display_name.clone(),
            email: p.email.clone(),
        }
    }
}

pub const MAX_SEARCH_RESULTS: usize = 50;

fn by_display_name(users: &mut [UserSummary]) {
    users.sort_by(|a, b| {
        a.display_name
            .to_lowercase()
            .cmp(&b.display_name.to_lowercase())
            .then(a.id.cmp(&b.id))
    });
}

pub struct Supervision<'a> {
    store: &'a dyn Store,
}

impl<'a> Supervision<'a> {
    pub fn new(store: &'a dyn Store) -> Self {
        Supervision { store }
    }

    /// Case-insensitive substring search over supervisor names and emails.
    pub fn search_supervisors(&self, query: &str) -> Result<Vec<UserSummary>> {
        let needle = query.trim().to_lowercase();
        if needle.chars().count() < 2 {
            return Err(Error::invalid(
                "search.query_too_short",
                "search needs at least two characters",
            ));
        }
        let mut hits: Vec<UserSummary> = self
            .store
            .users()?
            .iter()
            .filter(|u| u.role == Role::Supervisor)
            .filter(|u| u.display_name.to_lowercase().contains(&needle) || u.email.contains(&needle))
            .map(UserSummary::from)
            .collect();
        by_display_name(&mut hits);
        hits.truncate(MAX_SEARCH_RESULTS);
        Ok(hits)
    }

    pub fn associate(
        &self,
        caller: UserId,
        patient: UserId,
        supervisor: UserId,
        at: Timestamp,
    ) -> Result<SupervisionLink> {
        let p = self.store.user(patient)?;
        let s = self.store.user(supervisor)?;
        if caller != patient {
            return Err(Error::Forbidden("not_link_owner"));
        }
        if p.role != Role::Patient || s.role != Role::Supervisor {
            return Err(Error::invalid(
                "link.role_mismatch",
                "links join a patient to a supervisor",
            ));
        }
        self.store.create_link(patient, supervisor, at)
    }

    /// Either side of the link may sever it.
    pub fn dissociate(
        &self,
        caller: UserId,
        patient: UserId,
        supervisor: UserId,
        at: Timestamp,
    ) -> Result<SupervisionLink> {
        self.store.user(patient)?;
        self.store.user(supervisor)?;
        if caller != patient && caller != supervisor {
            return Err(Error::Forbidden("not_link_party"));
        }
        self.store.revoke_link(patient, supervisor, at)
    }

    pub fn list_supervisors(&self, patient: UserId) -> Result<Vec<UserSummary>> {
        self.store.user(patient)?;
        let links = self.store.links_of_patient(patient)?;
        self.counterparties(links.iter().filter(|l| l.is_active()).map(|l| l.supervisor))
    }

    pub fn list_supervised(&self, supervisor: UserId) -> Result<Vec<UserSummary>> {
        self.store.user(supervisor)?;
        let links = self.store.links_of_supervisor(supervisor)?;
        self.counterparties(links.iter().filter(|l| l.is_active()).map(|l| l.patient))
    }

    fn counterparties(&self, ids: impl Iterator<Item = UserId>) -> Result<Vec<UserSummary>> {
        let mut out = ids
            .map(|id| self.store.user(id).map(|u| UserSummary::from(&u)))
            .collect::<Result<Vec<_>>>()?;
        by_display_name(&mut out);
        Ok(out)
    }

    pub fn authorize(&self, actor: UserId, subject: UserId, action: Action) -> Result<AccessDecision> {
        self.store.user(actor)?;
        self.store.user(subject)?;
        let linked = actor != subject && self.store.has_active_link(subject, actor)?;
        Ok(decide(actor, subject, action, linked))
    }
}
