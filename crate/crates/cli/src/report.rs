// SPDX-License-Identifier: Apache-2.0
//! Error reporting, JSON output and run manifests.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;

/// Exit code 1: bad arguments, unreadable or malformed input.
pub const EXIT_INPUT: i32 = 1;
/// Exit code 2: the pipeline could not finish on well-formed input.
pub const EXIT_INTERNAL: i32 = 2;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn input(stage: &'static str, message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, stage, message: message.into() }
    }

    /// Classifies a library error raised during `stage`.
    pub fn from_lib(stage: &'static str, e: latentgraph::Error) -> Self {
        use latentgraph::Error as E;
        let code = match e {
            E::Undecided(_) | E::InconsistentInput(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        CliError { code, stage, message: e.to_string() }
    }

    pub fn to_json(&self) -> String {
        let kind = if self.code == EXIT_INPUT { "input" } else { "internal" };
        serde_json::json!({ "error": { "kind": kind, "stage": self.stage, "message": self.message } }).to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> Stage<T> for latentgraph::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::from_lib(stage, e))
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input("read", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input("read", format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub tool_version: &'static str,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64, started_at: DateTime<Utc>) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_at,
            finished_at: started_at,
            outputs: Vec::new(),
        }
    }

    /// Appends one JSON line to `manifest.jsonl` in `dir`.
    pub fn append(mut self, dir: &Path) -> CliResult<PathBuf> {
        self.finished_at = Utc::now();
        let path = dir.join(MANIFEST_FILE);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))?;
        let line = serde_json::to_string(&self).expect("manifest serializes");
        writeln!(file, "{line}").map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Prints to stdout; a closed pipe ends the process quietly.
pub fn print_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("failed writing to stdout: {e}");
    }
}
