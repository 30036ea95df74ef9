//! Batch front end: a TOML run configuration in, a CSV table out.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::Path;

use thiserror::Error;

pub use commands::execute;
pub use config::{RunConfig, Subcommand};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(dipbound::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<dipbound::Error> for CliError {
    fn from(e: dipbound::Error) -> Self {
        match e {
            dipbound::Error::InvalidInput(msg) => CliError::Config(ConfigError(msg)),
            dipbound::Error::Data { line, msg } => CliError::Config(ConfigError(format!("line {line}: {msg}"))),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub const CONFIG_BEGIN: &str = "config-begin";
pub const CONFIG_END: &str = "config-end";

/// Recovers the run configuration echoed into a CSV header.
pub fn config_from_header(csv: &str) -> Result<RunConfig, ConfigError> {
    let mut body = String::new();
    let mut inside = false;
    for line in csv.lines() {
        let Some(comment) = line.strip_prefix('#') else {
            break;
        };
        let text = comment.strip_prefix(' ').unwrap_or(comment);
        if text == CONFIG_BEGIN {
            inside = true;
        } else if text == CONFIG_END {
            return config::parse(&body);
        } else if inside {
            body.push_str(text);
            body.push('\n');
        }
    }
    Err(ConfigError("no embedded config block in header".into()))
}

/// Writes `text` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial table.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // temp files default to owner-only; results are ordinary files
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
