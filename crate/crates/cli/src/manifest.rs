//! CSV tables, atomic file writes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use heatcount_core::model::RCParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

/// Column-major numeric table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>, columns: Vec<Vec<f64>>) -> Self {
        assert_eq!(header.len(), columns.len(), "one column per header entry");
        if let Some(first) = columns.first() {
            assert!(columns.iter().all(|c| c.len() == first.len()), "ragged table");
        }
        Self { header, columns }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let k = self.header.iter().position(|h| *h == name)?;
        Some(&self.columns[k])
    }

    /// CSV with every value at 17 significant digits, enough to round-trip.
    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for i in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| format!("{:.16e}", c[i])))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let name = path.file_name().context("output path has no file name")?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl OutputFile {
    pub fn write(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<Self> {
        write_atomic(&dir.join(name), bytes)?;
        Ok(Self {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RcSource {
    Mapped,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    /// The configuration after experiment defaults were applied.
    pub config: RunConfig,
    pub rc_params: RCParams,
    pub rc_source: RcSource,
    pub threads: usize,
    pub wall_time_s: f64,
    /// True when some grid points failed; their rows hold NaN.
    pub partial: bool,
    pub failures: Vec<String>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    /// Written last, after every output it lists.
    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(&path, &json)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.schema_version != SCHEMA_VERSION {
            bail!(
                "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
                m.schema_version
            );
        }
        Ok(m)
    }
}

/// Recomputes every listed digest; returns one message per mismatch.
pub fn verify(dir: &Path) -> anyhow::Result<Vec<String>> {
    let manifest = RunManifest::read(dir)?;
    let mut problems = Vec::new();
    for out in &manifest.outputs {
        match fs::read(dir.join(&out.path)) {
            Ok(bytes) => {
                let digest = sha256_hex(&bytes);
                if digest != out.sha256 {
                    problems.push(format!("{}: sha256 {digest} does not match {}", out.path, out.sha256));
                } else if bytes.len() as u64 != out.bytes {
                    problems.push(format!("{}: size {} does not match {}", out.path, bytes.len(), out.bytes));
                }
            }
            Err(e) => problems.push(format!("{}: {e}", out.path)),
        }
    }
    Ok(problems)
}
