//! JSON run manifests written next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA: &str = "races-run-manifest/1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Versions {
    pub cli: String,
    pub core: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    /// Every flag value that affects the output, after defaults are applied.
    pub parameters: BTreeMap<String, Value>,
    pub versions: Versions,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
    /// Headline numbers also printed to stdout.
    pub results: BTreeMap<String, Value>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        RunManifest {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            versions: Versions {
                cli: env!("CARGO_PKG_VERSION").to_string(),
                core: races_core::VERSION.to_string(),
            },
            seed: None,
            rng: None,
            threads: rayon_threads(),
            started_unix: now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
            results: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn write(&mut self, path: &Path) -> Result<(), CliError> {
        self.finished_unix = now();
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::io("cannot write manifest", path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("cannot read manifest", path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

fn rayon_threads() -> usize {
    rayon::current_num_threads()
}

/// `<out>.manifest.json` next to an output file, else `<command>-manifest.json`.
pub fn default_path(command: &str, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from(format!("{command}-manifest.json")),
    }
}
