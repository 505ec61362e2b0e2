//! Cross-band statistics, principal components and redundant-band removal.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::SquareMatrix;
use crate::{Error, LabelMask, Raster, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandStatistics {
    pub means: Vec<f64>,
    /// Population covariance.
    pub covariance: SquareMatrix,
    /// Pearson correlation; rows and columns of zero-variance bands are 0 off the diagonal.
    pub correlation: SquareMatrix,
    /// Bands with zero variance.
    pub degenerate: Vec<bool>,
    pub pixel_count: usize,
}

impl BandStatistics {
    pub fn bands(&self) -> usize {
        self.means.len()
    }

    pub fn variance(&self, band: usize) -> f64 {
        self.covariance[(band, band)]
    }
}

/// Means and covariance over all pixels, or only over pixels the mask labels nonzero.
pub fn band_statistics(raster: &Raster, mask: Option<&LabelMask>) -> Result<BandStatistics> {
    if let Some(m) = mask {
        if !m.same_shape(raster.width(), raster.height()) {
            return Err(Error::DimensionMismatch(alloc::format!(
                "mask is {}x{}, raster is {}x{}",
                m.width(),
                m.height(),
                raster.width(),
                raster.height()
            )));
        }
    }
    let selected: Vec<usize> = match mask {
        Some(m) => m
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0)
            .map(|(i, _)| i)
            .collect(),
        None => (0..raster.pixel_count()).collect(),
    };
    if selected.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "band statistics need at least 2 pixels, got {}",
            selected.len()
        )));
    }
    let b = raster.bands();
    let n = selected.len() as f64;
    let means: Vec<f64> = (0..b)
        .map(|k| {
            let band = raster.band(k);
            selected.iter().map(|&i| band[i]).sum::<f64>() / n
        })
        .collect();
    let mut covariance = SquareMatrix::zeros(b);
    for p in 0..b {
        let bp = raster.band(p);
        for q in p..b {
            let bq = raster.band(q);
            let s: f64 = selected
                .iter()
                .map(|&i| (bp[i] - means[p]) * (bq[i] - means[q]))
                .sum();
            covariance[(p, q)] = s / n;
            covariance[(q, p)] = s / n;
        }
    }
    Ok(statistics_from_covariance(
        means,
        covariance,
        selected.len(),
    ))
}

/// Derives correlation and degeneracy flags from a covariance matrix.
pub fn statistics_from_covariance(
    means: Vec<f64>,
    covariance: SquareMatrix,
    pixel_count: usize,
) -> BandStatistics {
    let b = covariance.dim();
    let degenerate: Vec<bool> = (0..b).map(|k| covariance[(k, k)] <= 0.0).collect();
    let mut correlation = SquareMatrix::identity(b);
    for p in 0..b {
        for q in 0..b {
            if p == q || degenerate[p] || degenerate[q] {
                continue;
            }
            let r = covariance[(p, q)] / libm::sqrt(covariance[(p, p)] * covariance[(q, q)]);
            correlation[(p, q)] = r.clamp(-1.0, 1.0);
        }
    }
    BandStatistics {
        means,
        covariance,
        correlation,
        degenerate,
        pixel_count,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the component for `eigenvalues[k]`; its largest-magnitude entry is positive.
    pub eigenvectors: SquareMatrix,
    /// Fraction of total variance per component (all zero for a zero matrix).
    pub variance_explained: Vec<f64>,
}

pub fn principal_components(stats: &BandStatistics) -> Result<PcaResult> {
    principal_components_of(&stats.covariance)
}

/// Eigendecomposition of a symmetric (covariance) matrix with sorted, sign-normalized output.
pub fn principal_components_of(covariance: &SquareMatrix) -> Result<PcaResult> {
    let (values, vectors) = covariance.symmetric_eigen()?;
    let b = values.len();
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

    let mut eigenvalues = Vec::with_capacity(b);
    let mut eigenvectors = SquareMatrix::zeros(b);
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(values[src]);
        let mut col = vectors.column(src);
        let lead = col.iter().enumerate().fold(
            0,
            |best, (i, v)| if v.abs() > col[best].abs() { i } else { best },
        );
        if col[lead] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        for (i, v) in col.into_iter().enumerate() {
            eigenvectors[(i, k)] = v;
        }
    }
    let total: f64 = eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let variance_explained = if total > 0.0 {
        eigenvalues.iter().map(|v| v.max(0.0) / total).collect()
    } else {
        vec![0.0; b]
    };
    Ok(PcaResult {
        eigenvalues,
        eigenvectors,
        variance_explained,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BandDrop {
    pub dropped: usize,
    pub kept: usize,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BandSelection {
    /// Ascending band indices.
    pub retained: Vec<usize>,
    pub drops: Vec<BandDrop>,
}

/// Default |correlation| at which two bands count as carrying the same information.
pub const DEFAULT_REDUNDANCY_THRESHOLD: f64 = 0.95;

/// Greedy pairwise redundancy removal.
///
/// Pairs `(i, j)` with `i < j` are scanned in index order; when both bands
/// are still retained and `|corr| >= threshold`, the one with smaller
/// variance is dropped (the higher index on a tie).
pub fn select_bands(stats: &BandStatistics, threshold: f64) -> Result<BandSelection> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "redundancy threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let b = stats.bands();
    let mut retained = vec![true; b];
    let mut drops = Vec::new();
    for i in 0..b {
        for j in i + 1..b {
            if !(retained[i] && retained[j]) {
                continue;
            }
            let r = stats.correlation[(i, j)];
            if r.abs() >= threshold {
                let (dropped, kept) = if stats.variance(i) < stats.variance(j) {
                    (i, j)
                } else {
                    (j, i)
                };
                retained[dropped] = false;
                drops.push(BandDrop {
                    dropped,
                    kept,
                    correlation: r,
                });
            }
        }
    }
    Ok(BandSelection {
        retained: (0..b).filter(|&k| retained[k]).collect(),
        drops,
    })
}
