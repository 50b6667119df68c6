//! First-principal-component ordering of series.
//!
//! The model is fit on the real data only. Generated series are projected
//! with the same mean and direction so rows of every panel share one axis.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::series::{RealDataset, SeriesMatrix};

/// Mean and first principal direction of a real dataset.
///
/// `pc1` has unit norm and its largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    pc1: Vec<f64>,
    variance: f64,
}

impl PcaModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn pc1(&self) -> &[f64] {
        &self.pc1
    }

    /// Sample variance along `pc1` (the largest covariance eigenvalue).
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn series_len(&self) -> usize {
        self.mean.len()
    }

    /// `dot(s - mean, pc1)`.
    pub fn project(&self, s: &[f64]) -> Result<f64> {
        if s.len() != self.mean.len() {
            return Err(Error::InvalidInput(format!(
                "cannot project series of length {} onto a model of length {}",
                s.len(),
                self.mean.len()
            )));
        }
        Ok(self.project_unchecked(s))
    }

    fn project_unchecked(&self, s: &[f64]) -> f64 {
        s.iter()
            .zip(&self.mean)
            .zip(&self.pc1)
            .map(|((x, m), p)| (x - m) * p)
            .sum()
    }

    /// Row indices ordered by ascending projection; ties keep the lower index
    /// first.
    pub fn sort_order(&self, set: &SeriesMatrix) -> Result<Vec<usize>> {
        if set.series_len() != self.mean.len() {
            return Err(Error::ShapeMismatch(format!(
                "series length {} does not match the model length {}",
                set.series_len(),
                self.mean.len()
            )));
        }
        let scores: Vec<f64> = set.iter_rows().map(|r| self.project_unchecked(r)).collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)));
        Ok(order)
    }
}

/// Fits the columnwise mean and the leading eigenvector of the sample
/// covariance.
pub fn fit_pca(real: &RealDataset) -> Result<PcaModel> {
    let m = real.matrix();
    let (n, t) = (m.rows(), m.series_len());

    let first = m.row(0);
    if m.iter_rows().all(|r| r == first) {
        return Err(Error::DegenerateData(
            "all real series are identical; the covariance is zero and no ordering exists".into(),
        ));
    }

    let mut mean = vec![0.0; t];
    for row in m.iter_rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }

    let centered = DMatrix::from_fn(n, t, |i, j| m.row(i)[j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let (top, &variance) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("covariance has at least two eigenvalues");
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::DegenerateData(format!(
            "leading covariance eigenvalue is {variance}; the real data has no spread"
        )));
    }

    let mut pc1: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let norm = pc1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pivot = pc1
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let sign = if pc1[pivot] < 0.0 { -1.0 } else { 1.0 };
    for v in &mut pc1 {
        *v = sign * *v / norm;
    }

    Ok(PcaModel {
        mean,
        pc1,
        variance,
    })
}

/// Projection of `s` onto the first principal direction of `model`.
pub fn project_pc1(model: &PcaModel, s: &[f64]) -> Result<f64> {
    model.project(s)
}

/// Permutation of `0..rows` by ascending first-component score.
pub fn sort_by_pc1(model: &PcaModel, set: &SeriesMatrix) -> Result<Vec<usize>> {
    model.sort_order(set)
}
