use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetric;
use crate::error::{Error, Result};
use crate::pca::{fit_pca, PcaModel};
use crate::series::{GenerationRun, RealDataset, SeriesMatrix};

/// Direction of the nearest-neighbor search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    /// For each generated series, the distance to the closest real series.
    Innd,
    /// For each real series, the distance to the closest generated series.
    Onnd,
}

impl ViewKind {
    pub const ALL: [ViewKind; 2] = [ViewKind::Innd, ViewKind::Onnd];

    pub fn as_str(self) -> &'static str {
        match self {
            ViewKind::Innd => "innd",
            ViewKind::Onnd => "onnd",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ViewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "innd" => Ok(ViewKind::Innd),
            "onnd" => Ok(ViewKind::Onnd),
            other => Err(Error::InvalidInput(format!(
                "unknown kind '{other}', expected 'innd' or 'onnd'"
            ))),
        }
    }
}

/// For every source row, the minimum distance to any target row.
pub fn nearest_neighbor_distances(
    sources: &SeriesMatrix,
    targets: &SeriesMatrix,
    metric: DistanceMetric,
) -> Result<Vec<f64>> {
    if targets.rows() == 0 || sources.rows() == 0 {
        return Err(Error::InvalidInput("nearest neighbor search needs non-empty inputs".into()));
    }
    if sources.series_len() != targets.series_len() {
        return Err(Error::InvalidInput(format!(
            "source length {} differs from target length {}",
            sources.series_len(),
            targets.series_len()
        )));
    }
    let rows: Vec<&[f64]> = sources.iter_rows().collect();
    rows.par_iter()
        .map(|s| {
            targets.iter_rows().try_fold(f64::INFINITY, |best, t| {
                metric.distance(s, t).map(|d| best.min(d))
            })
        })
        .collect()
}

/// Samples x iterations matrix of nearest-neighbor distances.
///
/// Column `k` holds `rows[k]` cells. `cells[k][r]` is the distance of the
/// sample at sorted position `r`; `row_order[k][r]` is that sample's index in
/// its source matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationViewMatrix {
    pub kind: ViewKind,
    pub metric: DistanceMetric,
    pub iterations: Vec<u64>,
    pub rows: Vec<usize>,
    pub cells: Vec<Vec<f64>>,
    pub row_order: Vec<Vec<usize>>,
}

impl IterationViewMatrix {
    pub fn columns(&self) -> usize {
        self.iterations.len()
    }

    /// Minimum and maximum over all cells.
    pub fn extrema(&self) -> (f64, f64) {
        self.cells
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn column_means(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect()
    }

    pub fn column(&self, iteration: u64) -> Option<&[f64]> {
        self.iterations
            .iter()
            .position(|&i| i == iteration)
            .map(|k| self.cells[k].as_slice())
    }
}

/// Fits the ordering model on `real` and builds the view.
pub fn build_iteration_view(
    real: &RealDataset,
    run: &GenerationRun,
    metric: DistanceMetric,
    kind: ViewKind,
) -> Result<IterationViewMatrix> {
    let model = fit_pca(real)?;
    build_iteration_view_with_model(&model, real, run, metric, kind)
}

/// Builds the view with an already fitted ordering model.
///
/// ONND rows follow the fixed PC1 order of the real data. INND rows follow
/// the PC1 order of each iteration's own samples, projected with the real
/// model.
pub fn build_iteration_view_with_model(
    model: &PcaModel,
    real: &RealDataset,
    run: &GenerationRun,
    metric: DistanceMetric,
    kind: ViewKind,
) -> Result<IterationViewMatrix> {
    if run.series_len() != real.series_len() {
        return Err(Error::ShapeMismatch(format!(
            "run '{}' has series length {}, real data has {}",
            run.name(),
            run.series_len(),
            real.series_len()
        )));
    }
    let real_order = match kind {
        ViewKind::Onnd => Some(model.sort_order(real.matrix())?),
        ViewKind::Innd => None,
    };

    let columns: Vec<(Vec<f64>, Vec<usize>)> = run
        .snapshots()
        .par_iter()
        .map(|snap| {
            let (dists, order) = match kind {
                ViewKind::Innd => (
                    nearest_neighbor_distances(&snap.series, real.matrix(), metric)?,
                    model.sort_order(&snap.series)?,
                ),
                ViewKind::Onnd => (
                    nearest_neighbor_distances(real.matrix(), &snap.series, metric)?,
                    real_order.clone().expect("real order computed for onnd"),
                ),
            };
            let sorted = order.iter().map(|&i| dists[i]).collect();
            Ok((sorted, order))
        })
        .collect::<Result<_>>()?;

    let (cells, row_order): (Vec<_>, Vec<_>) = columns.into_iter().unzip();
    Ok(IterationViewMatrix {
        kind,
        metric,
        iterations: run.iterations().collect(),
        rows: cells.iter().map(Vec::len).collect(),
        cells,
        row_order,
    })
}
