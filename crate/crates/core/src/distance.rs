//! Pairwise distances between series: Euclidean and dynamic time warping.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MIN_LENGTH;

/// Distance measure used for nearest-neighbor structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    #[serde(rename = "ed")]
    Euclidean,
    Dtw,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 2] = [DistanceMetric::Euclidean, DistanceMetric::Dtw];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "ed",
            DistanceMetric::Dtw => "dtw",
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            DistanceMetric::Euclidean => euclidean_distance(a, b),
            DistanceMetric::Dtw => dtw_distance(a, b),
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" => Ok(DistanceMetric::Euclidean),
            "dtw" => Ok(DistanceMetric::Dtw),
            other => Err(Error::InvalidInput(format!(
                "unknown metric '{other}', expected 'ed' or 'dtw'"
            ))),
        }
    }
}

/// `sqrt(sum_t (a_t - b_t)^2)` over equal-length series.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "euclidean distance needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(squared_euclidean(a, b).sqrt())
}

// (a - b)^2 and (b - a)^2 are bit-identical, so this is exactly symmetric.
#[inline]
pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Full-band DTW with squared local cost and a final square root, so the
/// result is on the same scale as [`euclidean_distance`]. Lengths may differ
/// but each must be at least 2.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < MIN_LENGTH || b.len() < MIN_LENGTH {
        return Err(Error::InvalidInput(format!(
            "dtw needs series of length >= {MIN_LENGTH}, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    // Canonical argument order makes d(a, b) and d(b, a) run the same
    // floating-point operations.
    let (a, b) = if canonical_order(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    Ok(dtw_cost(a, b).sqrt())
}

fn canonical_order(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Accumulated squared cost of the optimal warping path, two rows of storage.
fn dtw_cost(a: &[f64], b: &[f64]) -> f64 {
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];

    // first row: only horizontal moves
    let mut acc = 0.0;
    for (j, &bj) in b.iter().enumerate() {
        acc += (a[0] - bj) * (a[0] - bj);
        prev[j] = acc;
    }

    for &ai in &a[1..] {
        curr[0] = prev[0] + (ai - b[0]) * (ai - b[0]);
        for j in 1..m {
            let cost = (ai - b[j]) * (ai - b[j]);
            let best = prev[j].min(curr[j - 1]).min(prev[j - 1]);
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m - 1]
}
