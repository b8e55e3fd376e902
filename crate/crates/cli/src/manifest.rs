//! Run manifests: what was run, on which inputs, with which settings.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector; running it again reproduces the outputs.
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub exit_code: i32,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn start(command: &str, argv: Vec<String>) -> Self {
        RunManifest {
            command: command.to_string(),
            argv,
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            exit_code: 0,
        }
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> std::io::Result<String> {
        let bytes = fs::read(path).map_err(|e| with_path(e, path))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}: {e}", path.display()),
            )
        })
    }

    pub fn write_output(&mut self, path: &Path, contents: &str) -> std::io::Result<()> {
        fs::write(path, contents).map_err(|e| with_path(e, path))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(mut self, path: &Path, exit_code: i32) -> std::io::Result<()> {
        self.finished_unix_ms = now_ms();
        self.exit_code = exit_code;
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| with_path(e, path))
    }
}

fn with_path(e: std::io::Error, path: &Path) -> std::io::Error {
    std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}
