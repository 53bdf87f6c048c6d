//! Service configuration: an optional TOML file, then environment overrides.

use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const ENV_LISTEN: &str = "GLYCOTRACK_LISTEN";
pub const ENV_STORE: &str = "GLYCOTRACK_STORE";
pub const ENV_BACKUP_DIR: &str = "GLYCOTRACK_BACKUP_DIR";
pub const ENV_TOKEN_TTL_HOURS: &str = "GLYCOTRACK_TOKEN_TTL_HOURS";
pub const ENV_BACKUP_INTERVAL_HOURS: &str = "GLYCOTRACK_BACKUP_INTERVAL_HOURS";
pub const ENV_CONTENT_DIR: &str = "GLYCOTRACK_CONTENT_DIR";

/// Store location. `:memory:` selects the volatile in-process store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreLocation {
    Memory,
    Sqlite(PathBuf),
}

impl StoreLocation {
    fn parse(s: &str) -> Self {
        if s == ":memory:" {
            StoreLocation::Memory
        } else {
            StoreLocation::Sqlite(PathBuf::from(s))
        }
    }
}

/// Argon2id cost parameters for credential hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashParams {
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

impl Default for HashParams {
    fn default() -> Self {
        HashParams {
            memory_kib: 19 * 1024,
            iterations: 2,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub listen: SocketAddr,
    pub store: StoreLocation,
    pub backup_dir: PathBuf,
    pub token_ttl_hours: u32,
    pub backup_interval_hours: u32,
    /// Directory holding `{faq,terms}.{lang}.md`; bundled texts otherwise.
    pub content_dir: Option<PathBuf>,
    pub password_hash: HashParams,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store: StoreLocation::Sqlite(PathBuf::from("glycotrack.db")),
            backup_dir: PathBuf::from("backups"),
            token_ttl_hours: 24,
            backup_interval_hours: 12,
            content_dir: None,
            password_hash: HashParams::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    listen: Option<SocketAddr>,
    store: Option<String>,
    backup_dir: Option<PathBuf>,
    token_ttl_hours: Option<u32>,
    backup_interval_hours: Option<u32>,
    content_dir: Option<PathBuf>,
    password_hash: Option<HashParams>,
}

/// A configuration problem, rendered as `source:line: message` when the
/// location is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.source, line, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    /// Reads `path` if given, then applies overrides from `env`.
    pub fn load(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Config, ConfigError> {
        let mut config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                    source: path.display().to_string(),
                    line: None,
                    message: e.to_string(),
                })?;
                Config::from_toml(&text, &path.display().to_string())?
            }
            None => Config::default(),
        };
        config.apply_env(env)?;
        config.check()?;
        Ok(config)
    }

    pub fn from_toml(text: &str, source: &str) -> Result<Config, ConfigError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError {
            source: source.to_string(),
            line: e.span().map(|span| line_of(text, span.start)),
            message: e.message().to_string(),
        })?;
        let defaults = Config::default();
        let config = Config {
            listen: file.listen.unwrap_or(defaults.listen),
            store: file.store.as_deref().map(StoreLocation::parse).unwrap_or(defaults.store),
            backup_dir: file.backup_dir.unwrap_or(defaults.backup_dir),
            token_ttl_hours: file.token_ttl_hours.unwrap_or(defaults.token_ttl_hours),
            backup_interval_hours: file.backup_interval_hours.unwrap_or(defaults.backup_interval_hours),
            content_dir: file.content_dir,
            password_hash: file.password_hash.unwrap_or_default(),
        };
        config.check().map_err(|mut e| {
            e.source = source.to_string();
            e
        })?;
        Ok(config)
    }

    fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        let bad = |var: &str, message: String| ConfigError {
            source: var.to_string(),
            line: None,
            message,
        };
        if let Some(v) = env(ENV_LISTEN) {
            self.listen = v
                .parse()
                .map_err(|e| bad(ENV_LISTEN, format!("invalid socket address '{v}': {e}")))?;
        }
        if let Some(v) = env(ENV_STORE) {
            self.store = StoreLocation::parse(&v);
        }
        if let Some(v) = env(ENV_BACKUP_DIR) {
            self.backup_dir = PathBuf::from(v);
        }
        if let Some(v) = env(ENV_CONTENT_DIR) {
            self.content_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = env(ENV_TOKEN_TTL_HOURS) {
            self.token_ttl_hours = v
                .parse()
                .map_err(|e| bad(ENV_TOKEN_TTL_HOURS, format!("invalid hour count '{v}': {e}")))?;
        }
        if let Some(v) = env(ENV_BACKUP_INTERVAL_HOURS) {
            self.backup_interval_hours = v
                .parse()
                .map_err(|e| bad(ENV_BACKUP_INTERVAL_HOURS, format!("invalid hour count '{v}': {e}")))?;
        }
        Ok(())
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |message: &str| ConfigError {
            source: "config".to_string(),
            line: None,
            message: message.to_string(),
        };
        if self.token_ttl_hours == 0 {
            return Err(bad("token_ttl_hours must be at least 1"));
        }
        if self.backup_interval_hours == 0 {
            return Err(bad("backup_interval_hours must be at least 1"));
        }
        let p = self.password_hash;
        if argon2::Params::new(p.memory_kib, p.iterations, p.parallelism, None).is_err() {
            return Err(bad("password_hash parameters are not valid Argon2 costs"));
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
