//! CSV and manifest writing.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SNAPSHOT_HEADER: [&str; 4] = ["x", "q", "o", "v"];
pub const DIAGNOSTICS_HEADER: [&str; 8] = ["t", "mass", "tv", "min_q", "max_q_minus_o", "osl_q", "osl_v", "violation"];
pub const FRONT_HEADER: [&str; 10] = [
    "t",
    "gamma_L",
    "gamma_R",
    "qL",
    "qR",
    "qxR",
    "speed_L_measured",
    "speed_L_predicted",
    "speed_R_measured",
    "speed_R_predicted",
];
pub const OVERLAY_HEADER: [&str; 3] = ["x", "v_eps", "v_star"];

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// A written file with its data row count and content hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub time: f64,
    #[serde(flatten)]
    pub entry: FileEntry,
}

/// Reference constants of the velocity slope estimate, logged for the
/// exponential model only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OslReferenceEntry {
    pub k0: f64,
    pub c0: f64,
    pub v: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSummary {
    pub truncated: bool,
    pub merge_events: Vec<f64>,
    pub trace_offset: usize,
    pub slope_stencil: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: RunConfig,
    pub code_version: String,
    pub steps: usize,
    pub wall_time_seconds: f64,
    pub boundary_net_inflow: f64,
    pub snapshots: Vec<SnapshotEntry>,
    pub diagnostics: FileEntry,
    pub fronts: Option<FileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_summary: Option<FrontSummary>,
    /// Why no front file was written, when fronts were requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub osl_reference: Option<OslReferenceEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Every file named here, with paths relative to the manifest directory.
    pub fn files(&self) -> impl Iterator<Item = &FileEntry> {
        self.snapshots
            .iter()
            .map(|s| &s.entry)
            .chain(std::iter::once(&self.diagnostics))
            .chain(self.fronts.iter())
    }
}

/// `snap_t<time>.csv` with the time in shortest round-trip form.
pub fn snapshot_file_name(time: f64) -> String {
    format!("snap_t{time}.csv")
}

pub fn overlay_file_name(time: f64) -> String {
    format!("overlay_t{time}.csv")
}

/// Shortest round-trip decimal; missing values become empty fields.
fn field(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<I>(dir: &Path, name: &str, header: &[&str], rows: I) -> Result<FileEntry>
where
    I: IntoIterator<Item = Vec<Option<f64>>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    let mut count = 0;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.into_iter().map(field))?;
        count += 1;
    }
    let bytes = w.into_inner().context("flushing csv buffer")?;
    let entry = FileEntry { file: name.into(), rows: count, sha256: sha256_hex(&bytes) };
    fs::write(dir.join(name), bytes).with_context(|| format!("writing {}", dir.join(name).display()))?;
    Ok(entry)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Rereads `entry` under `dir` and checks its row count and hash.
pub fn verify_entry(dir: &Path, entry: &FileEntry) -> Result<()> {
    let path = dir.join(&entry.file);
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    anyhow::ensure!(sha256_hex(&bytes) == entry.sha256, "{}: content hash mismatch", path.display());
    let rows = csv::Reader::from_reader(bytes.as_slice()).records().count();
    anyhow::ensure!(rows == entry.rows, "{}: {} rows, manifest says {}", path.display(), rows, entry.rows);
    Ok(())
}

/// Numeric columns of a CSV written by [`write_csv`]; empty fields read as NaN.
pub fn read_columns(path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    anyhow::ensure!(
        header.iter().map(String::as_str).eq(expected.iter().copied()),
        "{}: header {:?}, expected {:?}",
        path.display(),
        header,
        expected
    );
    let mut cols = vec![Vec::new(); expected.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (col, v) in cols.iter_mut().zip(rec.iter()) {
            col.push(if v.is_empty() {
                f64::NAN
            } else {
                v.parse().with_context(|| format!("{}: row {}: bad number '{v}'", path.display(), line + 2))?
            });
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_missing_fields() {
        let dir = tempfile::tempdir().unwrap();
        let e = write_csv(dir.path(), "a.csv", &["t", "v"], vec![vec![Some(0.1), None], vec![Some(1.0), Some(-2.5e-7)]])
            .unwrap();
        assert_eq!(e.rows, 2);
        let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(text, "t,v\n0.1,\n1,-0.00000025\n");
        verify_entry(dir.path(), &e).unwrap();
        let cols = read_columns(&dir.path().join("a.csv"), &["t", "v"]).unwrap();
        assert!(cols[1][0].is_nan() && cols[1][1] == -2.5e-7);
        assert!(read_columns(&dir.path().join("a.csv"), &["x", "v"]).is_err());
    }

    #[test]
    fn snapshot_names() {
        assert_eq!(snapshot_file_name(0.25), "snap_t0.25.csv");
        assert_eq!(snapshot_file_name(1.0), "snap_t1.csv");
        assert_eq!(snapshot_file_name(0.0), "snap_t0.csv");
    }
}
