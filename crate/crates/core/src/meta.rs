//! JSON sidecar written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

pub const TOOL_NAME: &str = "noisemt";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: Value,
    pub stats: Value,
}

impl Metadata {
    pub fn new(command: impl Into<String>, params: Value) -> Self {
        Metadata {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: command.into(),
            rng: None,
            seed: None,
            params,
            stats: Value::Null,
        }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.rng = Some(RNG_ALGORITHM);
        self.seed = Some(seed);
        self
    }

    pub fn with_stats(mut self, stats: Value) -> Self {
        self.stats = stats;
        self
    }

    pub fn write_for(&self, output: &Path) -> Result<PathBuf> {
        let path = sidecar_path(output);
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::param(format!("metadata serialization: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// `out.txt` → `out.txt.meta.json`
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}
