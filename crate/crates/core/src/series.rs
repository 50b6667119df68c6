//! Domain types: single series, series matrices, the real reference set and
//! generation runs.

use std::ops::Deref;

use crate::error::{Error, Result};

/// Minimum number of time points in a series.
pub const MIN_LENGTH: usize = 2;

/// One uni-variate, fixed-length, finite-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.len() < MIN_LENGTH {
        return Err(Error::InvalidInput(format!(
            "series length {} is below the minimum of {MIN_LENGTH}",
            values.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite value {} at time step {i}",
            values[i]
        )));
    }
    Ok(())
}

/// A dense row-major matrix of `rows` series, each `len` points long.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    rows: usize,
    len: usize,
    data: Vec<f64>,
}

impl SeriesMatrix {
    /// Builds a matrix from row-major data. Requires at least one row, rows of
    /// length >= 2 and finite values.
    pub fn new(rows: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidInput("series matrix has no rows".into()));
        }
        if len < MIN_LENGTH {
            return Err(Error::InvalidInput(format!(
                "series length {len} is below the minimum of {MIN_LENGTH}"
            )));
        }
        if data.len() != rows * len {
            return Err(Error::ShapeMismatch(format!(
                "expected {rows}x{len} = {} values, got {}",
                rows * len,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value {} in row {}, time step {}",
                data[i],
                i / len,
                i % len
            )));
        }
        Ok(Self { rows, len, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidInput("series matrix has no rows".into()));
        };
        let len = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * len);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != len {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has length {}, expected {len}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), len, data)
    }

    /// Number of series.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Series length T.
    pub fn series_len(&self) -> usize {
        self.len
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.len)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn series(&self, i: usize) -> TimeSeries {
        TimeSeries(self.row(i).to_vec())
    }

    /// Returns a new matrix whose row `k` is row `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(order.len() * self.len);
        for &i in order {
            if i >= self.rows {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(order.len(), self.len, data)
    }

    /// Smallest and largest value over all cells.
    pub fn value_range(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// The real reference corpus: N >= 2 series of identical length. Series ids
/// are row positions in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealDataset {
    series: SeriesMatrix,
}

impl RealDataset {
    pub fn new(series: SeriesMatrix) -> Result<Self> {
        if series.rows() < 2 {
            return Err(Error::InvalidInput(format!(
                "real dataset needs at least 2 series, got {}",
                series.rows()
            )));
        }
        Ok(Self { series })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(SeriesMatrix::from_rows(rows)?)
    }

    pub fn matrix(&self) -> &SeriesMatrix {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn series_len(&self) -> usize {
        self.series.series_len()
    }
}

/// Generator output captured at one training iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: u64,
    pub series: SeriesMatrix,
}

/// An ordered sequence of snapshots from one generator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRun {
    name: String,
    snapshots: Vec<Snapshot>,
}

impl GenerationRun {
    /// Iteration numbers must be strictly increasing and all snapshots must
    /// share one series length.
    pub fn new(name: impl Into<String>, snapshots: Vec<Snapshot>) -> Result<Self> {
        let name = name.into();
        if snapshots.is_empty() {
            return Err(Error::InvalidInput(format!("run '{name}' has no iterations")));
        }
        for w in snapshots.windows(2) {
            if w[1].iteration <= w[0].iteration {
                return Err(Error::InvalidInput(format!(
                    "run '{name}': iteration numbers not strictly increasing ({} then {})",
                    w[0].iteration, w[1].iteration
                )));
            }
        }
        let t = snapshots[0].series.series_len();
        if let Some(s) = snapshots.iter().find(|s| s.series.series_len() != t) {
            return Err(Error::ShapeMismatch(format!(
                "run '{name}': iteration {} has series length {}, expected {t}",
                s.iteration,
                s.series.series_len()
            )));
        }
        Ok(Self { name, snapshots })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn iterations(&self) -> impl Iterator<Item = u64> + '_ {
        self.snapshots.iter().map(|s| s.iteration)
    }

    pub fn snapshot(&self, iteration: u64) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&iteration, |s| s.iteration)
            .ok()
            .map(|i| &self.snapshots[i])
    }

    pub fn series_len(&self) -> usize {
        self.snapshots[0].series.series_len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_series_rejects_short_and_non_finite() {
        assert!(TimeSeries::new(vec![1.0]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(TimeSeries::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn matrix_rows_and_permutation() {
        let m = SeriesMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        let p = m.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.row(0), &[5.0, 6.0]);
        assert_eq!(p.row(2), &[3.0, 4.0]);
        assert!(m.permuted(&[3]).is_err());
        assert_eq!(m.value_range(), (1.0, 6.0));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = SeriesMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0, 3.0]]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn real_dataset_needs_two_series() {
        let one = SeriesMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(RealDataset::new(one).is_err());
    }

    #[test]
    fn run_validation() {
        let snap = |it| Snapshot {
            iteration: it,
            series: SeriesMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap(),
        };
        assert!(GenerationRun::new("a", vec![snap(10), snap(10)]).is_err());
        assert!(GenerationRun::new("a", vec![snap(10), snap(5)]).is_err());
        assert!(GenerationRun::new("a", vec![]).is_err());
        let run = GenerationRun::new("a", vec![snap(40), snap(386), snap(926)]).unwrap();
        assert_eq!(run.iterations().collect::<Vec<_>>(), vec![40, 386, 926]);
        assert!(run.snapshot(386).is_some());
        assert!(run.snapshot(387).is_none());
    }
}
