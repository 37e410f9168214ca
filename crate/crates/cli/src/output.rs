//! Run directory handling: the manifest and atomically written CSVs.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn new(path: &Path, contents: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub scenario: Option<String>,
    pub seed: u64,
    pub out_dir: Option<String>,
    pub version: String,
    /// Hash of the canonical scenario, defaults included.
    pub config_hash: String,
    pub inputs: Vec<InputFile>,
}

/// Where results go: files in the run directory, or the primary table on
/// stdout when there is none.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Creates the run directory and writes the manifest. Must precede any
    /// result.
    pub fn begin(&self, manifest: &RunManifest) -> Result<(), Failure> {
        let json = serde_json::to_vec_pretty(manifest).map_err(Failure::input)?;
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
                write_atomic(&dir.join(MANIFEST), &json)
            }
            None => {
                log::info!("manifest: {}", String::from_utf8_lossy(&json));
                Ok(())
            }
        }
    }

    /// The command's main table; printed to stdout without a run directory.
    pub fn primary(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        match &self.dir {
            Some(dir) => write_atomic(&dir.join(name), bytes),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    /// A side table; dropped without a run directory.
    pub fn secondary(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        match &self.dir {
            Some(dir) => write_atomic(&dir.join(name), bytes),
            None => {
                log::debug!("no --out, skipping {name}");
                Ok(())
            }
        }
    }
}

/// Writes `path` through a temporary sibling and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let wrap = |e: io::Error| Failure::input(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(wrap)?;
    f.write_all(bytes).map_err(wrap)?;
    f.sync_all().map_err(wrap)?;
    fs::rename(&tmp, path).map_err(wrap)
}
