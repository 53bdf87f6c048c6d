//! Random associate/dissociate histories checked against a set model, then
//! every (actor, subject, action) triple enumerated.

use std::collections::BTreeSet;

use chrono::Duration;
use glycotrack_core::domain::{Role, UserId};
use glycotrack_core::persistence::{MemoryStore, SqliteStore, Store};
use glycotrack_core::supervision::{AccessDecision, Action, Supervision};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fixtures;

pub fn run() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5afe_7e57);
    let mut triples = 0usize;
    let mut ops = 0usize;
    for seq in 0..1000 {
        let store: Box<dyn Store> = if seq % 10 == 0 {
            Box::new(SqliteStore::open_in_memory().unwrap())
        } else {
            Box::new(MemoryStore::new())
        };
        let store = store.as_ref();
        // Six users with a random patient/supervisor split.
        let roles: Vec<Role> = (0..6)
            .map(|i| match i {
                0 => Role::Patient,
                1 => Role::Supervisor,
                _ if rng.random_bool(0.5) => Role::Patient,
                _ => Role::Supervisor,
            })
            .collect();
        let users: Vec<UserId> = roles
            .iter()
            .enumerate()
            .map(|(i, &r)| fixtures::add_user(store, &mut rng, r, i))
            .collect();
        let role = |u: UserId| roles[users.iter().position(|&x| x == u).unwrap()];
        let sup = Supervision::new(store);

        let mut active: BTreeSet<(UserId, UserId)> = BTreeSet::new();
        let mut at = fixtures::base();
        for _ in 0..rng.random_range(1..=40) {
            at += Duration::minutes(1);
            let pick = |rng: &mut ChaCha8Rng| users[rng.random_range(0..6)];
            let (caller, patient, supervisor) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let roles_ok = role(patient) == Role::Patient && role(supervisor) == Role::Supervisor;
            let key = (patient, supervisor);
            if rng.random_bool(0.6) {
                let should = caller == patient && roles_ok && !active.contains(&key);
                let did = sup.associate(caller, patient, supervisor, at).is_ok();
                if did != should {
                    return Err(format!("seq {seq}: associate({caller}, {patient}, {supervisor}) ok={did}"));
                }
                if did {
                    active.insert(key);
                }
            } else {
                let should = (caller == patient || caller == supervisor) && active.contains(&key);
                let did = sup.dissociate(caller, patient, supervisor, at).is_ok();
                if did != should {
                    return Err(format!("seq {seq}: dissociate({caller}, {patient}, {supervisor}) ok={did}"));
                }
                if did {
                    active.remove(&key);
                }
            }
            ops += 1;
        }

        for &actor in &users {
            for &subject in &users {
                for action in [Action::Read, Action::Write] {
                    let allowed = sup.authorize(actor, subject, action).unwrap() == AccessDecision::Allow;
                    if actor != subject {
                        if action == Action::Write && allowed {
                            return Err(format!("seq {seq}: write allowed for {actor} on {subject}"));
                        }
                        if action == Action::Read && allowed != active.contains(&(subject, actor)) {
                            return Err(format!("seq {seq}: read {actor}->{subject} allowed={allowed}"));
                        }
                    } else if !allowed {
                        return Err(format!("seq {seq}: {actor} denied own {action:?}"));
                    }
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("1000 histories, {ops} operations, {triples} triples"))
}
