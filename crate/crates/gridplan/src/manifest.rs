//! Run manifests: what was run, with which inputs and solver settings.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use gridplan_core::data::SystemSpec;
use gridplan_core::lp::SolveOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub scaling: bool,
}

impl From<&SolveOptions> for SolverSettings {
    fn from(o: &SolveOptions) -> Self {
        SolverSettings {
            tolerance: o.tolerance,
            max_iterations: o.max_iterations,
            scaling: o.scaling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// SHA-256 of the resolved system in canonical JSON.
    pub config_hash: String,
    pub created_unix: u64,
    pub command: String,
    pub jobs: usize,
    pub cases: Vec<String>,
    pub solver: SolverSettings,
}

impl RunManifest {
    pub fn new(
        spec: &SystemSpec,
        command: impl Into<String>,
        cases: Vec<String>,
        solver: &SolveOptions,
        jobs: usize,
    ) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(spec),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            command: command.into(),
            jobs,
            cases,
            solver: solver.into(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&dir.join("manifest.json"), text.as_bytes())
    }
}

/// Hex SHA-256 of `spec` serialized with sorted object keys, so the hash
/// does not depend on the key order of the source file.
pub fn config_hash(spec: &SystemSpec) -> String {
    let value = serde_json::to_value(spec).expect("spec serializes");
    // serde_json's default map is ordered by key.
    let canonical = serde_json::to_string(&value).expect("value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
