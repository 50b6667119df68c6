//! Run manifests (`run.json`) and the files they reference.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::csv;
use crate::error::{Error, Result};
use crate::series::{GenerationRun, RealDataset, Snapshot};

pub const MANIFEST_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub name: String,
    pub iterations: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub iteration: u64,
    pub file: String,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })
}

/// Loads a headerless CSV real dataset; ids follow row order.
pub fn load_real(path: impl AsRef<Path>) -> Result<RealDataset> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let m = csv::parse_matrix(&text).map_err(|e| e.with_path(path))?;
    RealDataset::new(m).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Loads a run manifest and its snapshots. When `expected_len` is given,
/// every snapshot must have that series length.
pub fn load_run(manifest_path: impl AsRef<Path>, expected_len: Option<usize>) -> Result<GenerationRun> {
    let path = manifest_path.as_ref();
    let text = read_text(path)?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::InvalidManifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let invalid = |message: String| Error::InvalidManifest {
        path: path.to_path_buf(),
        message,
    };
    if manifest.name.is_empty() {
        return Err(invalid("run name is empty".into()));
    }
    if manifest.iterations.is_empty() {
        return Err(invalid("no iterations listed".into()));
    }
    for w in manifest.iterations.windows(2) {
        if w[1].iteration <= w[0].iteration {
            return Err(invalid(format!(
                "iteration numbers must be strictly increasing, found {} after {}",
                w[1].iteration, w[0].iteration
            )));
        }
    }

    let base = path.parent().unwrap_or(Path::new("."));
    let mut snapshots = Vec::with_capacity(manifest.iterations.len());
    for entry in &manifest.iterations {
        let file = base.join(&entry.file);
        let text = read_text(&file)?;
        let series = csv::parse_matrix(&text).map_err(|e| e.with_path(&file))?;
        let expected = expected_len.unwrap_or_else(|| {
            snapshots
                .first()
                .map(|s: &Snapshot| s.series.series_len())
                .unwrap_or(series.series_len())
        });
        if series.series_len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{}: series length {} at iteration {}, expected {expected}",
                file.display(),
                series.series_len(),
                entry.iteration
            )));
        }
        snapshots.push(Snapshot {
            iteration: entry.iteration,
            series,
        });
    }
    GenerationRun::new(manifest.name, snapshots)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_real(path: impl AsRef<Path>, real: &RealDataset) -> Result<()> {
    write_file(path.as_ref(), csv::format_matrix(real.matrix()).as_bytes())
}

/// Snapshot file name used when writing runs.
pub fn snapshot_file_name(iteration: u64) -> String {
    format!("iter_{iteration:06}.csv")
}

/// Writes `run.json` plus one CSV per iteration into `dir`; returns the
/// manifest path.
pub fn write_run(dir: impl AsRef<Path>, run: &GenerationRun) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let mut entries = Vec::with_capacity(run.snapshots().len());
    for snap in run.snapshots() {
        let file = snapshot_file_name(snap.iteration);
        write_file(&dir.join(&file), csv::format_matrix(&snap.series).as_bytes())?;
        entries.push(ManifestEntry {
            iteration: snap.iteration,
            file,
        });
    }
    let manifest = RunManifest {
        name: run.name().to_string(),
        iterations: entries,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    let path = dir.join(MANIFEST_FILE);
    write_file(&path, &json)?;
    Ok(path)
}
