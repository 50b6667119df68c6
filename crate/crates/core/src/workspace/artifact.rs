//! Cacheable metric artifacts and the keys that identify them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::metrics::{IterationViewMatrix, RealStats, TimeHistogram, ViewKind};

/// The series set an artifact is derived from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataSource {
    Real,
    Iteration { run: String, iteration: u64 },
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::Real => f.write_str("source=real"),
            DataSource::Iteration { run, iteration } => {
                write!(f, "run={run} iteration={iteration}")
            }
        }
    }
}

/// Identifies one artifact plus the parameters it was computed with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArtifactKey {
    IterationView {
        run: String,
        metric: DistanceMetric,
        kind: ViewKind,
    },
    /// Colorfield plus time histogram of one series set.
    Detail { source: DataSource, bins: usize },
    RealStats,
    /// PC1 permutation of one series set.
    Order { source: DataSource },
}

impl ArtifactKey {
    /// Canonical text form; part of the content hash.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ArtifactKey::IterationView { .. } => "iteration-view",
            ArtifactKey::Detail { .. } => "detail",
            ArtifactKey::RealStats => "real-stats",
            ArtifactKey::Order { .. } => "order",
        }
    }
}

impl fmt::Display for ArtifactKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactKey::IterationView { run, metric, kind } => {
                write!(f, "iteration-view run={run} metric={metric} kind={kind}")
            }
            ArtifactKey::Detail { source, bins } => write!(f, "detail {source} bins={bins}"),
            ArtifactKey::RealStats => f.write_str("real-stats"),
            ArtifactKey::Order { source } => write!(f, "order {source}"),
        }
    }
}

/// Dense-pixel rows of a series set in PC1 order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Colorfield {
    /// Display ids, `0..M` after sorting.
    pub ids: Vec<usize>,
    /// File-order index of each displayed row.
    pub original_index: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub colorfield: Colorfield,
    pub time_histogram: TimeHistogram,
    /// Real-data value range, shared by every colorfield panel.
    pub value_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Artifact {
    IterationView(IterationViewMatrix),
    Detail(Detail),
    RealStats(RealStats),
    Order(Vec<usize>),
}

impl Artifact {
    pub fn into_iteration_view(self) -> Option<IterationViewMatrix> {
        match self {
            Artifact::IterationView(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_detail(self) -> Option<Detail> {
        match self {
            Artifact::Detail(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_real_stats(self) -> Option<RealStats> {
        match self {
            Artifact::RealStats(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_order(self) -> Option<Vec<usize>> {
        match self {
            Artifact::Order(v) => Some(v),
            _ => None,
        }
    }

    /// Canonical JSON bytes.
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("artifacts serialize")
    }

    /// Decodes `data` as the artifact type named by `key`.
    pub fn from_value(key: &ArtifactKey, data: serde_json::Value) -> serde_json::Result<Self> {
        Ok(match key {
            ArtifactKey::IterationView { .. } => Artifact::IterationView(serde_json::from_value(data)?),
            ArtifactKey::Detail { .. } => Artifact::Detail(serde_json::from_value(data)?),
            ArtifactKey::RealStats => Artifact::RealStats(serde_json::from_value(data)?),
            ArtifactKey::Order { .. } => Artifact::Order(serde_json::from_value(data)?),
        })
    }
}
