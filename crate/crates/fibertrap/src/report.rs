//! Deterministic result files: JSON reports, CSV tables, and the manifest
//! that ties a time-tag stream to the configuration that produced it.
//! Nothing here embeds wall-clock time, so identical runs produce
//! byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::simkit::ExperimentConfig;

/// SHA-256 of the canonical TOML serialization of a configuration, as a
/// lowercase hex string. Reports carry this so results can be traced to
/// their exact inputs.
pub fn config_hash(config: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.to_toml().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write a value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("json encode: {e}")))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Write a CSV table: a header row and then one row per record.
pub fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    write_bytes(path, out.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io_context(parent, e))?;
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::io_context(path, e))?;
    file.write_all(bytes)
        .map_err(|e| Error::io_context(path, e))
}

/// Sidecar describing a simulated time-tag stream; written next to the
/// stream so analysis can recover the scan structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamManifest {
    pub version: u32,
    /// Hash of the full run configuration that produced the stream.
    pub config_hash: String,
    pub seed: u64,
    pub n_scans: u64,
    /// Tick length of one scan; scan `k` occupies ticks
    /// `[k * scan_ticks, (k+1) * scan_ticks)`.
    pub scan_ticks: u64,
    pub resolution_fs: u32,
    pub n_records: u64,
    pub channel_counts: [u64; 2],
    /// The experiment parameters themselves, for window reconstruction.
    pub experiment: ExperimentConfig,
}

impl StreamManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io_context(path, e))?;
        let manifest: StreamManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("manifest parse: {e}")))?;
        if manifest.version != 1 {
            return Err(Error::Input(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        Ok(manifest)
    }
}
