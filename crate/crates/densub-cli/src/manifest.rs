//! Run manifests: enough metadata to re-run any command and reproduce its
//! outputs bit for bit (timings excluded).

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Version of the on-disk formats (coordinate, CSV schema, PGM, JSON layouts).
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub format_version: String,
    pub command: String,
    pub rng_family: String,
    /// The complete parameter set of the invocation, seeds included.
    pub parameters: serde_json::Value,
    /// Wall-clock creation time; informational only, excluded from
    /// reproducibility comparisons.
    pub created_unix_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        RunManifest {
            tool: "densub".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format_version: FORMAT_VERSION.into(),
            command: command.into(),
            rng_family: densub::model::RNG_FAMILY.into(),
            parameters,
            created_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_carries_command_and_params() {
        let m = RunManifest::new("sample", serde_json::json!({"seed": 7}));
        let v = m.to_json();
        assert_eq!(v["command"], "sample");
        assert_eq!(v["parameters"]["seed"], 7);
        assert_eq!(v["rng_family"], "chacha8");
        assert_eq!(v["format_version"], FORMAT_VERSION);
    }
}
