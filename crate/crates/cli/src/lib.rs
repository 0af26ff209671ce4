//! Library half of the `sicr` command-line tool: configuration, file
//! formats, and the pipeline stages the binary wires to subcommands.
//!
//! Everything here is deterministic given the config's root seed — the
//! binary's `run-grid` and the equivalent sequence of stepwise subcommands
//! produce byte-identical report files.

pub mod config;
pub mod formats;
pub mod pipeline;

use std::fmt;
use std::path::{Path, PathBuf};

use sicr_core::Error;

/// Top-level failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A required input file does not exist (exit 2).
    MissingInput(PathBuf),
    /// A model was applied to a panel built under a different schema (exit 3).
    SchemaMismatch(String),
    /// Everything else: component errors, parse errors, I/O (exit 1).
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::SchemaMismatch(_) => 3,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::MissingInput(path) => write!(f, "missing input file: {}", path.display()),
            CliError::SchemaMismatch(what) | CliError::Failure(what) => f.write_str(what),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.tag() {
            "schema-mismatch" => CliError::SchemaMismatch(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

/// Read a text input, mapping a missing file to exit code 2.
pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingInput(path.to_path_buf())
        } else {
            CliError::Failure(format!("{}: {e}", path.display()))
        }
    })
}

/// Write a file atomically: to a dot-prefixed temp name in the same
/// directory, then rename over the target. A crashed or concurrent run never
/// leaves a half-written artifact under the real name.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Failure(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Failure(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}
