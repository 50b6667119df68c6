//! Evaluation core for generated time series.
//!
//! Compares snapshots of a generator's output against a real reference set:
//! nearest-neighbor distances in both directions (per generated sample and per
//! real sample), first-principal-component ordering, per-time-step histograms
//! and median/percentile statistics of the real data. A [`Workspace`] loads
//! datasets from disk and caches every computed artifact by content hash.

pub mod distance;
pub mod error;
pub mod metrics;
pub mod pca;
pub mod series;
pub mod synth;
pub mod workspace;

pub use distance::{dtw_distance, euclidean_distance, DistanceMetric};
pub use error::{Error, Result};
pub use metrics::{
    build_iteration_view, compute_bin_edges, diff_to_median, nearest_neighbor_distances,
    percentile_membership, real_stats, time_histogram, Band, BinEdges, IterationViewMatrix,
    RealStats, TimeHistogram, ViewKind,
};
pub use pca::{fit_pca, project_pc1, sort_by_pc1, PcaModel};
pub use series::{GenerationRun, RealDataset, SeriesMatrix, Snapshot, TimeSeries};
pub use synth::{generate_real, generate_run, Regime, SynthConfig};
pub use workspace::{Artifact, ArtifactKey, DataSource, Workspace};
