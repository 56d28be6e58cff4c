//! Run manifests: everything needed to regenerate an output file.

use std::path::Path;

use assoc_core::ScenarioConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const MANIFEST_PREFIX: &str = "# manifest: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Simulate {
        config: ScenarioConfig,
        n_batches: usize,
        scenarios_per_batch: usize,
    },
    Tables {
        /// Template for every grid cell; `n_tracks`, `regime`, `model_policy`
        /// and `distances` are overridden per cell.
        base: ScenarioConfig,
        n_batches: usize,
        scenarios_per_batch: usize,
    },
    Curve {
        delta_z: f64,
        variances: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub job: Job,
    /// File names (without directories) of the outputs; `None` means stdout.
    pub outputs: Vec<Option<String>>,
}

impl RunManifest {
    pub fn new(job: Job, outputs: Vec<Option<String>>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            job,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(self.to_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Comment lines that open every CSV output.
    pub fn csv_header(&self) -> String {
        format!(
            "# assoc-bench {}\n# manifest-sha256: {}\n{MANIFEST_PREFIX}{}\n",
            self.tool_version,
            self.sha256(),
            self.to_json()
        )
    }

    /// Reads a manifest from a CSV output (its comment header), a JSON
    /// summary (its `manifest` field) or a bare manifest JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |e: serde_json::Error| CliError::config(format!("{}: unreadable manifest: {e}", path.display()));
        if let Some(line) = text.lines().find_map(|l| l.strip_prefix(MANIFEST_PREFIX)) {
            return serde_json::from_str(line).map_err(bad);
        }
        let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
        let inner = value.get("manifest").cloned().unwrap_or(value);
        serde_json::from_value(inner).map_err(bad)
    }
}

/// File-name part of an output path, as recorded in manifests.
pub fn output_name(path: Option<&Path>) -> Option<String> {
    path.map(|p| {
        p.file_name()
            .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
    })
}
