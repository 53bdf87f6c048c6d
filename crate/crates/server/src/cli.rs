//! Command-line entry points.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use chrono::{Duration, NaiveDate};
use clap::{Parser, Subcommand};
use glycotrack_core::clock::{Clock, SystemClock};
use glycotrack_core::persistence::{self, MemoryStore, SqliteStore, Store};

use crate::auth::Credentials;
use crate::config::{Config, StoreLocation};
use crate::content::ContentLibrary;
use crate::{csv_io, seed, AppState};

#[derive(Debug, Parser)]
#[command(name = "glycotrack", version, about = "Diabetes diary service")]
pub struct Cli {
    /// TOML configuration file; environment variables override it.
    #[arg(long, short, global = true, env = "GLYCOTRACK_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API and the periodic backup job.
    Serve,
    /// Write one backup archive now.
    BackupNow {
        /// Destination directory; defaults to the configured backup_dir.
        #[arg(long)]
        dest: Option<PathBuf>,
    },
    /// Load a backup archive into an empty store.
    Restore { archive: PathBuf },
    /// Write every user, link and record as CSV files into DIR.
    Export { dir: PathBuf },
    /// Import an exported directory into an empty store, or append one
    /// `<kind>.csv` file to existing patients.
    Import { path: PathBuf },
    /// Load the demo dataset into an empty store.
    Seed {
        /// First day of the four seeded weeks (YYYY-MM-DD).
        #[arg(long, default_value_t = seed::DEFAULT_ANCHOR)]
        anchor: NaiveDate,
    },
}

pub fn open_store(config: &Config) -> Result<Arc<dyn Store>> {
    Ok(match &config.store {
        StoreLocation::Memory => Arc::new(MemoryStore::new()),
        StoreLocation::Sqlite(path) => Arc::new(
            SqliteStore::open(path).with_context(|| format!("opening store {}", path.display()))?,
        ),
    })
}

pub fn load_config(cli: &Cli) -> Result<Config> {
    Ok(Config::load(cli.config.as_deref(), |k| std::env::var(k).ok())?)
}

/// Runs a parsed command to completion.
pub fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli)?;
    let store = open_store(&config)?;
    let clock: Arc<dyn Clock> = Arc::new(SystemClock);
    match cli.command {
        Command::Serve => serve(config, store, clock),
        Command::BackupNow { dest } => {
            let dest = dest.unwrap_or_else(|| config.backup_dir.clone());
            let manifest = persistence::backup_snapshot(store.as_ref(), &dest, clock.now())?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
            Ok(())
        }
        Command::Restore { archive } => {
            let manifest = persistence::restore(store.as_ref(), &archive)
                .with_context(|| format!("restoring {}", archive.display()))?;
            println!("restored {} ({})", archive.display(), counts(&manifest.record_counts));
            Ok(())
        }
        Command::Export { dir } => {
            let files = csv_io::export(store.as_ref(), &dir)?;
            println!("wrote {} files to {}", files.len(), dir.display());
            Ok(())
        }
        Command::Import { path } => {
            let s = csv_io::import(store.as_ref(), &path)?;
            println!("imported {} users, {} links, {} records", s.users, s.links, s.records);
            Ok(())
        }
        Command::Seed { anchor } => {
            let creds = Credentials::new(config.password_hash);
            let s = seed::seed(store.as_ref(), anchor, &|p| creds.hash(p))?;
            println!(
                "seeded {} patients, {} supervisors, {} records (password '{}')",
                s.patients.len(),
                s.supervisors.len(),
                s.records,
                seed::DEMO_PASSWORD
            );
            Ok(())
        }
    }
}

fn counts(c: &std::collections::BTreeMap<String, u64>) -> String {
    c.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

fn serve(config: Config, store: Arc<dyn Store>, clock: Arc<dyn Clock>) -> Result<()> {
    let mut state = AppState::new(
        store.clone(),
        clock.clone(),
        Credentials::new(config.password_hash),
        Duration::hours(i64::from(config.token_ttl_hours)),
    );
    if let Some(dir) = &config.content_dir {
        let lib = ContentLibrary::from_dir(dir).map_err(anyhow::Error::msg)?;
        state = state.with_content(lib);
    }
    let scheduler = persistence::spawn_backup_scheduler(
        store,
        config.backup_dir.clone(),
        clock,
        Duration::hours(i64::from(config.backup_interval_hours)),
        std::time::Duration::from_secs(30),
    )?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .with_context(|| format!("binding {}", config.listen))?;
        tracing::info!(addr = %config.listen, "listening");
        axum::serve(listener, crate::app(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
                tracing::info!("shutting down");
            })
            .await?;
        anyhow::Ok(())
    })?;
    scheduler.stop();
    Ok(())
}
