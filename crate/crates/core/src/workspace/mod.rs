//! On-disk workspaces: a real dataset, any number of generation runs and a
//! content-addressed cache of computed artifacts.
//!
//! Layout:
//!
//! ```text
//! <root>/real.csv
//! <root>/runs/<dir>/run.json
//! <root>/runs/<dir>/<snapshot>.csv
//! <root>/.ganseval-cache/<sha256>.json
//! ```

mod artifact;
pub mod csv;
pub mod export;
mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use artifact::{Artifact, ArtifactKey, Colorfield, DataSource, Detail};
pub use manifest::{
    load_real, load_run, snapshot_file_name, write_real, write_run, ManifestEntry, RunManifest,
    MANIFEST_FILE,
};

use crate::error::{Error, Result};
use crate::metrics::{build_iteration_view_with_model, compute_bin_edges, real_stats, time_histogram};
use crate::pca::fit_pca;
use crate::series::{GenerationRun, RealDataset, SeriesMatrix};

pub const REAL_FILE: &str = "real.csv";
pub const RUNS_DIR: &str = "runs";
pub const CACHE_DIR: &str = ".ganseval-cache";

const HASH_SALT: &str = "ganseval-cache-v1";

/// Result of a cache lookup.
#[derive(Debug)]
pub struct Fetched {
    pub artifact: Artifact,
    pub from_cache: bool,
    /// Set when a freshly computed artifact could not be persisted.
    pub storage_error: Option<Error>,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    hash: String,
    data: serde_json::Value,
}

#[derive(Serialize)]
struct CacheEntryRef<'a> {
    key: &'a str,
    hash: &'a str,
    data: &'a Artifact,
}

#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    cache_dir: PathBuf,
    real: RealDataset,
    runs: BTreeMap<String, GenerationRun>,
    real_digest: String,
    snapshot_digests: BTreeMap<String, Vec<String>>,
    computed: AtomicU64,
}

fn matrix_digest(m: &SeriesMatrix) -> String {
    let mut h = Sha256::new();
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.series_len() as u64).to_le_bytes());
    for v in m.as_slice() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl Workspace {
    /// Opens `<root>` with the cache in `<root>/.ganseval-cache`.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        Self::open_with_cache_dir(root, root.join(CACHE_DIR))
    }

    pub fn open_with_cache_dir(root: impl AsRef<Path>, cache_dir: impl Into<PathBuf>) -> Result<Self> {
        let root = root.as_ref();
        let real = load_real(root.join(REAL_FILE))?;
        let mut runs = Vec::new();
        let runs_dir = root.join(RUNS_DIR);
        if runs_dir.is_dir() {
            let mut dirs: Vec<PathBuf> = fs::read_dir(&runs_dir)
                .map_err(|e| Error::io(&runs_dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.join(MANIFEST_FILE).is_file())
                .collect();
            dirs.sort();
            for dir in dirs {
                runs.push(load_run(dir.join(MANIFEST_FILE), Some(real.series_len()))?);
            }
        }
        Self::from_parts(root, cache_dir, real, runs)
    }

    /// Builds a workspace from in-memory data.
    pub fn from_parts(
        root: impl Into<PathBuf>,
        cache_dir: impl Into<PathBuf>,
        real: RealDataset,
        runs: Vec<GenerationRun>,
    ) -> Result<Self> {
        let mut by_name = BTreeMap::new();
        let mut digests = BTreeMap::new();
        for run in runs {
            if run.series_len() != real.series_len() {
                return Err(Error::ShapeMismatch(format!(
                    "run '{}' has series length {}, real data has {}",
                    run.name(),
                    run.series_len(),
                    real.series_len()
                )));
            }
            let name = run.name().to_string();
            digests.insert(
                name.clone(),
                run.snapshots().iter().map(|s| matrix_digest(&s.series)).collect(),
            );
            if by_name.insert(name.clone(), run).is_some() {
                return Err(Error::InvalidInput(format!("duplicate run name '{name}'")));
            }
        }
        Ok(Self {
            root: root.into(),
            cache_dir: cache_dir.into(),
            real_digest: matrix_digest(real.matrix()),
            real,
            runs: by_name,
            snapshot_digests: digests,
            computed: AtomicU64::new(0),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    pub fn real(&self) -> &RealDataset {
        &self.real
    }

    pub fn runs(&self) -> impl Iterator<Item = &GenerationRun> {
        self.runs.values()
    }

    pub fn run_names(&self) -> impl Iterator<Item = &str> {
        self.runs.keys().map(String::as_str)
    }

    pub fn run(&self, name: &str) -> Option<&GenerationRun> {
        self.runs.get(name)
    }

    /// Number of artifacts computed (cache misses) since opening.
    pub fn compute_count(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    fn source_matrix(&self, source: &DataSource) -> Result<&SeriesMatrix> {
        match source {
            DataSource::Real => Ok(self.real.matrix()),
            DataSource::Iteration { run, iteration } => {
                let r = self
                    .run(run)
                    .ok_or_else(|| Error::NotFound(format!("run '{run}'")))?;
                r.snapshot(*iteration)
                    .map(|s| &s.series)
                    .ok_or_else(|| Error::NotFound(format!("iteration {iteration} of run '{run}'")))
            }
        }
    }

    fn source_digest(&self, source: &DataSource, h: &mut Sha256) -> Result<()> {
        if let DataSource::Iteration { run, iteration } = source {
            let r = self
                .run(run)
                .ok_or_else(|| Error::NotFound(format!("run '{run}'")))?;
            let idx = r
                .snapshots()
                .binary_search_by_key(iteration, |s| s.iteration)
                .map_err(|_| Error::NotFound(format!("iteration {iteration} of run '{run}'")))?;
            h.update(self.snapshot_digests[run][idx].as_bytes());
        }
        Ok(())
    }

    /// Content hash of the artifact's inputs and parameters.
    pub fn content_hash(&self, key: &ArtifactKey) -> Result<String> {
        let mut h = Sha256::new();
        h.update(HASH_SALT.as_bytes());
        h.update(b"\n");
        h.update(key.canonical().as_bytes());
        h.update(b"\n");
        h.update(self.real_digest.as_bytes());
        match key {
            ArtifactKey::IterationView { run, .. } => {
                let digests = self
                    .snapshot_digests
                    .get(run)
                    .ok_or_else(|| Error::NotFound(format!("run '{run}'")))?;
                for (snap, d) in self.runs[run].snapshots().iter().zip(digests) {
                    h.update(snap.iteration.to_le_bytes());
                    h.update(d.as_bytes());
                }
            }
            ArtifactKey::Detail { source, .. } | ArtifactKey::Order { source } => {
                self.source_digest(source, &mut h)?
            }
            ArtifactKey::RealStats => {}
        }
        Ok(hex::encode(h.finalize()))
    }

    /// Computes an artifact without touching the cache.
    pub fn compute(&self, key: &ArtifactKey) -> Result<Artifact> {
        Ok(match key {
            ArtifactKey::IterationView { run, metric, kind } => {
                let r = self
                    .run(run)
                    .ok_or_else(|| Error::NotFound(format!("run '{run}'")))?;
                let model = fit_pca(&self.real)?;
                Artifact::IterationView(build_iteration_view_with_model(
                    &model, &self.real, r, *metric, *kind,
                )?)
            }
            ArtifactKey::Detail { source, bins } => {
                let set = self.source_matrix(source)?;
                let model = fit_pca(&self.real)?;
                let order = model.sort_order(set)?;
                let edges = compute_bin_edges(&self.real, *bins)?;
                Artifact::Detail(Detail {
                    colorfield: Colorfield {
                        ids: (0..order.len()).collect(),
                        rows: order.iter().map(|&i| set.row(i).to_vec()).collect(),
                        original_index: order,
                    },
                    time_histogram: time_histogram(set, &edges),
                    value_range: self.real.matrix().value_range(),
                })
            }
            ArtifactKey::RealStats => Artifact::RealStats(real_stats(&self.real)),
            ArtifactKey::Order { source } => {
                let set = self.source_matrix(source)?;
                Artifact::Order(fit_pca(&self.real)?.sort_order(set)?)
            }
        })
    }

    fn entry_path(&self, hash: &str) -> PathBuf {
        self.cache_dir.join(format!("{hash}.json"))
    }

    fn read_cached(&self, key: &ArtifactKey, hash: &str) -> Option<Artifact> {
        let bytes = fs::read(self.entry_path(hash)).ok()?;
        let entry: CacheEntry = serde_json::from_slice(&bytes).ok()?;
        if entry.hash != hash || entry.key != key.canonical() {
            return None;
        }
        Artifact::from_value(key, entry.data).ok()
    }

    fn persist(&self, key: &ArtifactKey, hash: &str, artifact: &Artifact) -> Result<()> {
        let storage = |what: &str, e: &dyn std::fmt::Display| {
            Error::Storage(format!("{what} {}: {e}", self.cache_dir.display()))
        };
        fs::create_dir_all(&self.cache_dir).map_err(|e| storage("cannot create", &e))?;
        let canonical = key.canonical();
        let bytes = serde_json::to_vec(&CacheEntryRef {
            key: &canonical,
            hash,
            data: artifact,
        })
        .expect("cache entries serialize");
        let mut tmp = tempfile::NamedTempFile::new_in(&self.cache_dir)
            .map_err(|e| storage("cannot write to", &e))?;
        tmp.write_all(&bytes).map_err(|e| storage("cannot write to", &e))?;
        tmp.persist(self.entry_path(hash))
            .map_err(|e| storage("cannot rename into", &e.error))?;
        Ok(())
    }

    /// Returns the cached artifact when its content hash matches, otherwise
    /// computes, persists and returns it. Persistence failures are reported
    /// in [`Fetched::storage_error`] alongside the computed value.
    pub fn get_or_compute(&self, key: &ArtifactKey) -> Result<Fetched> {
        let hash = self.content_hash(key)?;
        if let Some(artifact) = self.read_cached(key, &hash) {
            return Ok(Fetched {
                artifact,
                from_cache: true,
                storage_error: None,
            });
        }
        let artifact = self.compute(key)?;
        self.computed.fetch_add(1, Ordering::Relaxed);
        let storage_error = self.persist(key, &hash, &artifact).err();
        Ok(Fetched {
            artifact,
            from_cache: false,
            storage_error,
        })
    }

    /// Keys of every entry currently stored in the cache directory, sorted.
    pub fn cached_keys(&self) -> Result<Vec<String>> {
        let dir = match fs::read_dir(&self.cache_dir) {
            Ok(d) => d,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&self.cache_dir, e)),
        };
        let mut keys = Vec::new();
        for entry in dir.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if let Ok(e) = serde_json::from_slice::<CacheEntry>(&bytes) {
                keys.push(e.key);
            }
        }
        keys.sort();
        Ok(keys)
    }

    /// Every artifact key a full batch computation materializes.
    pub fn all_keys(&self, metrics: &[crate::distance::DistanceMetric], bins: usize) -> Vec<ArtifactKey> {
        let mut keys = vec![
            ArtifactKey::RealStats,
            ArtifactKey::Order { source: DataSource::Real },
            ArtifactKey::Detail { source: DataSource::Real, bins },
        ];
        for run in self.runs.values() {
            for &metric in metrics {
                for kind in crate::metrics::ViewKind::ALL {
                    keys.push(ArtifactKey::IterationView {
                        run: run.name().to_string(),
                        metric,
                        kind,
                    });
                }
            }
            for iteration in run.iterations() {
                let source = DataSource::Iteration {
                    run: run.name().to_string(),
                    iteration,
                };
                keys.push(ArtifactKey::Order { source: source.clone() });
                keys.push(ArtifactKey::Detail { source, bins });
            }
        }
        keys
    }
}
