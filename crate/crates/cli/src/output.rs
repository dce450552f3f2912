use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

/// Flag values that parse but make no sense.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO_TRACT: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_EQUATION: u8 = 5;
pub const EXIT_IO: u8 = 6;

impl CliError {
    pub fn new(code: u8, message: impl ToString) -> Self {
        Self {
            code,
            // one line on stderr
            message: message.to_string().replace('\n', " "),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", dir.display())))
}

pub fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> CliResult {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Writes `manifest.json`: the subcommand, its effective configuration, the
/// files written and the only timestamp of the run.
pub fn write_manifest<T: Serialize>(dir: &Path, subcommand: &str, config: &T, effective: Value, files: &[&str]) -> CliResult {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "tool": "tractdyn",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "flags": config,
        "effective": effective,
        "files": files,
        "created_unix": secs,
    });
    write_bytes(dir, "manifest.json", to_json(&manifest).as_bytes())
}
