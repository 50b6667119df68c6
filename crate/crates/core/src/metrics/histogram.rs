use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{RealDataset, SeriesMatrix};

pub const DEFAULT_BINS: usize = 20;

/// B + 1 strictly increasing, equal-width bin edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinEdges(Vec<f64>);

impl BinEdges {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 edges (2 bins), got {}",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("bin edges must be finite and strictly increasing".into()));
        }
        Ok(Self(edges))
    }

    pub fn bins(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Bin of `v` under `[e_b, e_{b+1})` with the last bin closed. Values
    /// outside the edges are clamped into the first or last bin.
    pub fn bin_of(&self, v: f64) -> usize {
        let last = self.bins() - 1;
        if v >= self.0[last + 1] {
            return last;
        }
        // number of edges <= v, minus one, is the containing bin
        self.0.partition_point(|&e| e <= v).saturating_sub(1).min(last)
    }
}

/// Equal-width bins spanning the value range of the real data.
pub fn compute_bin_edges(real: &RealDataset, bins: usize) -> Result<BinEdges> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("bin count must be at least 2, got {bins}")));
    }
    let (lo, hi) = real.matrix().value_range();
    if lo == hi {
        return Err(Error::DegenerateData(format!(
            "every real value equals {lo}; histogram range is empty"
        )));
    }
    let span = hi - lo;
    let mut edges: Vec<f64> = (0..=bins)
        .map(|i| lo + span * i as f64 / bins as f64)
        .collect();
    edges[bins] = hi;
    BinEdges::new(edges).map_err(|_| {
        Error::DegenerateData(format!(
            "value range [{lo}, {hi}] is too narrow for {bins} distinct bins"
        ))
    })
}

/// Per-time-step value histogram of a set of series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeHistogram {
    pub bin_edges: BinEdges,
    /// `counts[t][b]`: number of series whose value at `t` falls into bin `b`.
    pub counts: Vec<Vec<u32>>,
}

impl TimeHistogram {
    pub fn max_count(&self) -> u32 {
        self.counts.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn time_histogram(set: &SeriesMatrix, edges: &BinEdges) -> TimeHistogram {
    let mut counts = vec![vec![0u32; edges.bins()]; set.series_len()];
    for row in set.iter_rows() {
        for (col, &v) in counts.iter_mut().zip(row) {
            col[edges.bin_of(v)] += 1;
        }
    }
    TimeHistogram {
        bin_edges: edges.clone(),
        counts,
    }
}
