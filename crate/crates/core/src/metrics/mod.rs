//! Structures derived from a real dataset and generation runs: nearest
//! neighbor distance matrices, time histograms and real-data percentile
//! statistics.

mod histogram;
mod neighbors;
mod stats;

pub use histogram::{compute_bin_edges, time_histogram, BinEdges, TimeHistogram, DEFAULT_BINS};
pub use neighbors::{
    build_iteration_view, build_iteration_view_with_model, nearest_neighbor_distances,
    IterationViewMatrix, ViewKind,
};
pub use stats::{
    diff_to_median, percentile_membership, quantile_sorted, real_stats, Band, RealStats,
};
