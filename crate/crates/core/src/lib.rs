//! Core of the glycotrack diabetes self-monitoring service.
//!
//! - [`domain`]: clinical records, profiles, targets and their invariants
//! - [`units`]: glucose/weight unit conversion and BMI
//! - [`analytics`]: evolution series, statistics and the weekly grid
//! - [`supervision`]: patient/supervisor links and the access rule
//! - [`persistence`]: the storage trait, two stores, backups

pub mod analytics;
pub mod clock;
pub mod domain;
pub mod error;
pub mod persistence;
pub mod supervision;
pub mod units;

pub use error::{Error, Result, Violation};
