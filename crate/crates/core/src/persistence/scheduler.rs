//! Periodic backups driven by an injected clock.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

use chrono::Duration;

use crate::clock::Clock;
use crate::domain::Timestamp;
use crate::error::{Error, Result};

use super::{backup_snapshot, BackupManifest, Store};

pub const DEFAULT_BACKUP_INTERVAL: Duration = Duration::hours(12);

/// Tracks which interval slot since `origin` last produced a backup.
///
/// A slot is due once the clock has crossed its boundary. Polling after a
/// long gap fires once for the latest slot, so downtime yields a single
/// catch-up backup rather than one per missed boundary.
#[derive(Debug, Clone)]
pub struct BackupSchedule {
    origin: Timestamp,
    interval: Duration,
    last_slot: i64,
}

impl BackupSchedule {
    pub fn new(origin: Timestamp, interval: Duration) -> Result<Self> {
        if interval <= Duration::zero() {
            return Err(Error::invalid("backup.interval_not_positive", "backup interval must be positive"));
        }
        Ok(BackupSchedule {
            origin,
            interval,
            last_slot: 0,
        })
    }

    fn slot(&self, now: Timestamp) -> i64 {
        let elapsed = (now - self.origin).num_seconds();
        elapsed.div_euclid(self.interval.num_seconds().max(1))
    }

    /// True when a boundary has been crossed since the last time this
    /// returned true. Marks the slot as taken.
    pub fn poll(&mut self, now: Timestamp) -> bool {
        let slot = self.slot(now);
        if slot > self.last_slot {
            self.last_slot = slot;
            true
        } else {
            false
        }
    }
}

/// A schedule bound to a store and destination.
pub struct BackupJob {
    store: Arc<dyn Store>,
    destination: PathBuf,
    schedule: BackupSchedule,
}

impl BackupJob {
    pub fn new(store: Arc<dyn Store>, destination: PathBuf, schedule: BackupSchedule) -> Self {
        BackupJob {
            store,
            destination,
            schedule,
        }
    }

    /// Runs a backup if one is due. A failed backup is logged and not
    /// retried until the next boundary.
    pub fn tick(&mut self, now: Timestamp) -> Option<Result<BackupManifest>> {
        if !self.schedule.poll(now) {
            return None;
        }
        let outcome = backup_snapshot(self.store.as_ref(), &self.destination, now);
        match &outcome {
            Ok(m) => tracing::info!(archive = %m.destination.display(), "backup written"),
            Err(e) => tracing::error!(error = %e, "scheduled backup failed"),
        }
        Some(outcome)
    }
}

/// Handle to a running scheduler thread; stops the thread on drop.
pub struct SchedulerHandle {
    stop: Option<mpsc::Sender<()>>,
    thread: Option<thread::JoinHandle<()>>,
    completed: Arc<AtomicUsize>,
    failed: Arc<AtomicUsize>,
}

impl SchedulerHandle {
    pub fn backups_completed(&self) -> usize {
        self.completed.load(Ordering::SeqCst)
    }

    pub fn backups_failed(&self) -> usize {
        self.failed.load(Ordering::SeqCst)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        drop(self.stop.take());
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for SchedulerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Starts a thread that checks `clock` every `poll_every` and backs up
/// `store` into `destination` whenever an `interval` boundary, counted from
/// the clock reading at start, has passed.
pub fn spawn_backup_scheduler(
    store: Arc<dyn Store>,
    destination: PathBuf,
    clock: Arc<dyn Clock>,
    interval: Duration,
    poll_every: std::time::Duration,
) -> Result<SchedulerHandle> {
    let schedule = BackupSchedule::new(clock.now(), interval)?;
    let mut job = BackupJob::new(store, destination, schedule);
    let (tx, rx) = mpsc::channel::<()>();
    let completed = Arc::new(AtomicUsize::new(0));
    let failed = Arc::new(AtomicUsize::new(0));
    let (done, fail) = (completed.clone(), failed.clone());
    let thread = thread::Builder::new()
        .name("backup-scheduler".into())
        .spawn(move || loop {
            match job.tick(clock.now()) {
                Some(Ok(_)) => {
                    done.fetch_add(1, Ordering::SeqCst);
                }
                Some(Err(_)) => {
                    fail.fetch_add(1, Ordering::SeqCst);
                }
                None => {}
            }
            match rx.recv_timeout(poll_every) {
                Err(mpsc::RecvTimeoutError::Timeout) => continue,
                _ => break,
            }
        })?;
    Ok(SchedulerHandle {
        stop: Some(tx),
        thread: Some(thread),
        completed,
        failed,
    })
}
