use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::RealDataset;

/// Per-time-step median and centered coverage bands of the real data.
///
/// Each band is a `(lo, hi)` pair; `band68 ⊆ band95 ⊆ band997` and the
/// median lies inside all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealStats {
    pub median: Vec<f64>,
    pub band68: Vec<(f64, f64)>,
    pub band95: Vec<(f64, f64)>,
    pub band997: Vec<(f64, f64)>,
}

impl RealStats {
    pub fn series_len(&self) -> usize {
        self.median.len()
    }

    pub fn band(&self, band: Band) -> &[(f64, f64)] {
        match band {
            Band::P68 => &self.band68,
            Band::P95 => &self.band95,
            Band::P997 => &self.band997,
        }
    }
}

/// Centered coverage band of the real data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Band {
    P68,
    P95,
    P997,
}

impl Band {
    /// Narrowest first.
    pub const ALL: [Band; 3] = [Band::P68, Band::P95, Band::P997];

    /// Coverage in percent.
    pub fn coverage(self) -> f64 {
        match self {
            Band::P68 => 68.0,
            Band::P95 => 95.0,
            Band::P997 => 99.7,
        }
    }

    /// Lower and upper quantile levels in `[0, 1]`.
    pub fn quantiles(self) -> (f64, f64) {
        match self {
            Band::P68 => (0.16, 0.84),
            Band::P95 => (0.025, 0.975),
            Band::P997 => (0.0015, 0.9985),
        }
    }
}

impl Serialize for Band {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.coverage())
    }
}

/// Linear-interpolation quantile of ascending `sorted` at level `p ∈ [0, 1]`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn real_stats(real: &RealDataset) -> RealStats {
    let m = real.matrix();
    let t_len = m.series_len();
    let mut stats = RealStats {
        median: Vec::with_capacity(t_len),
        band68: Vec::with_capacity(t_len),
        band95: Vec::with_capacity(t_len),
        band997: Vec::with_capacity(t_len),
    };
    let mut column = Vec::with_capacity(m.rows());
    for t in 0..t_len {
        column.clear();
        column.extend(m.iter_rows().map(|r| r[t]));
        column.sort_by(f64::total_cmp);

        let med = quantile_sorted(&column, 0.5);
        let band = |b: Band| {
            let (pl, ph) = b.quantiles();
            (quantile_sorted(&column, pl), quantile_sorted(&column, ph))
        };
        // Interpolation is monotone in the level up to rounding; the clamps
        // only absorb last-ulp differences.
        let b68 = band(Band::P68);
        let b68 = (b68.0.min(med), b68.1.max(med));
        let b95 = band(Band::P95);
        let b95 = (b95.0.min(b68.0), b95.1.max(b68.1));
        let b997 = band(Band::P997);
        let b997 = (b997.0.min(b95.0), b997.1.max(b95.1));

        stats.median.push(med);
        stats.band68.push(b68);
        stats.band95.push(b95);
        stats.band997.push(b997);
    }
    stats
}

fn check_len(s: &[f64], stats: &RealStats) -> Result<()> {
    if s.len() != stats.series_len() {
        return Err(Error::InvalidInput(format!(
            "series length {} does not match statistics length {}",
            s.len(),
            stats.series_len()
        )));
    }
    Ok(())
}

/// `|s_t - median_t|` for every time step.
pub fn diff_to_median(s: &[f64], stats: &RealStats) -> Result<Vec<f64>> {
    check_len(s, stats)?;
    Ok(s.iter().zip(&stats.median).map(|(x, m)| (x - m).abs()).collect())
}

/// Narrowest band that contains `s` at every time step, if any.
pub fn percentile_membership(s: &[f64], stats: &RealStats) -> Result<Option<Band>> {
    check_len(s, stats)?;
    Ok(Band::ALL.into_iter().find(|&b| {
        s.iter()
            .zip(stats.band(b))
            .all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }))
}
