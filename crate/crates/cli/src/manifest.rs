use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const MANIFEST_FORMAT: &str = "aca-manifest v1";

/// What produced a run directory: every other file in it names this one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
}

/// Collects the pieces of a manifest while a command runs.
pub struct ManifestBuilder {
    command: String,
    seed: u64,
    started_unix: u64,
    clock: Instant,
}

impl ManifestBuilder {
    pub fn start(command: &str, seed: u64) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            seed,
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            clock: Instant::now(),
        }
    }

    pub fn finish(self, config: serde_json::Value, outputs: Vec<String>) -> RunManifest {
        RunManifest {
            format: MANIFEST_FORMAT.to_string(),
            command: self.command,
            argv: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config,
            started_unix: self.started_unix,
            wall_clock_secs: self.clock.elapsed().as_secs_f64(),
            outputs,
        }
    }
}
