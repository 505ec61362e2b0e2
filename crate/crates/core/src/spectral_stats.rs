//! Per-band histograms and moment diagnostics for the Gaussian assumption.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Raster, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Histogram {
    pub band_index: usize,
    /// `counts.len() + 1` strictly increasing edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Index of the most populated bin (first one on ties).
    pub fn modal_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    /// Bin a value would fall into, clamped to the histogram range.
    pub fn bin_of(&self, value: f64) -> usize {
        let bins = self.counts.len();
        let lo = self.bin_edges[0];
        let hi = self.bin_edges[bins];
        bin_index(value, lo, (hi - lo) / bins as f64, bins)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn bin_index(value: f64, lo: f64, width: f64, bins: usize) -> usize {
    let pos = (value - lo) / width;
    if pos <= 0.0 {
        0
    } else {
        (libm::floor(pos) as usize).min(bins - 1)
    }
}

/// Equal-width histogram spanning `[min, max]` of one band.
///
/// The maximum lands in the last bin. A constant band gets unit-width bins
/// starting at its value, so every pixel falls in bin 0.
pub fn band_histogram(raster: &Raster, band: usize, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let values = raster.checked_band(band)?;
    let (min, max) = min_max(values);
    let (lo, width) = if max > min {
        (min, (max - min) / bins as f64)
    } else {
        (min, 1.0)
    };
    let mut bin_edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
    if max > min {
        bin_edges[bins] = max;
    }
    let mut counts = vec![0u64; bins];
    for &v in values {
        counts[bin_index(v, lo, width, bins)] += 1;
    }
    Ok(Histogram {
        band_index: band,
        bin_edges,
        counts,
    })
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum NormalityVerdict {
    ApproximatelyNormal,
    Skewed,
    HeavyTailed,
    /// Zero variance; skewness and kurtosis are undefined.
    Degenerate,
}

/// Limits on |skewness| and |excess kurtosis| for an "approximately normal" verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NormalityThresholds {
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Default for NormalityThresholds {
    fn default() -> Self {
        Self {
            skewness: 0.5,
            excess_kurtosis: 1.0,
        }
    }
}

impl NormalityThresholds {
    pub fn verdict(&self, skewness: f64, excess_kurtosis: f64) -> NormalityVerdict {
        if skewness.abs() >= self.skewness {
            NormalityVerdict::Skewed
        } else if excess_kurtosis.abs() >= self.excess_kurtosis {
            NormalityVerdict::HeavyTailed
        } else {
            NormalityVerdict::ApproximatelyNormal
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MomentsReport {
    pub band_index: usize,
    pub mean: f64,
    pub variance: f64,
    /// `None` for a constant band.
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub verdict: NormalityVerdict,
}

/// Population moments of one band with the default thresholds.
pub fn band_moments(raster: &Raster, band: usize) -> Result<MomentsReport> {
    band_moments_with(raster, band, &NormalityThresholds::default())
}

pub fn band_moments_with(
    raster: &Raster,
    band: usize,
    thresholds: &NormalityThresholds,
) -> Result<MomentsReport> {
    let values = raster.checked_band(band)?;
    if values.len() < 4 {
        return Err(Error::InvalidArgument(alloc::format!(
            "moments need at least 4 pixels, band has {}",
            values.len()
        )));
    }
    let m = moments(values);
    let (skewness, excess_kurtosis, verdict) = if m.m2 > 0.0 {
        let skew = m.m3 / libm::pow(m.m2, 1.5);
        let kurt = m.m4 / (m.m2 * m.m2) - 3.0;
        (Some(skew), Some(kurt), thresholds.verdict(skew, kurt))
    } else {
        (None, None, NormalityVerdict::Degenerate)
    };
    Ok(MomentsReport {
        band_index: band,
        mean: m.mean,
        variance: m.m2,
        skewness,
        excess_kurtosis,
        verdict,
    })
}

struct CentralMoments {
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn moments(values: &[f64]) -> CentralMoments {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    CentralMoments {
        mean,
        m2: m2 / n,
        m3: m3 / n,
        m4: m4 / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_band(values: Vec<f64>) -> Raster {
        Raster::from_bands(values.len(), 1, 1.0, vec![values]).unwrap()
    }

    #[test]
    fn constant_band_fills_a_single_bin() {
        let r = one_band(vec![7.0; 9]);
        for bins in [1, 2, 10] {
            let h = band_histogram(&r, 0, bins).unwrap();
            assert_eq!(h.counts[0], 9);
            assert_eq!(h.total(), 9);
            assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn equal_width_bins_put_max_in_last_bin() {
        let h = band_histogram(&one_band(vec![0.0, 1.0, 2.0, 3.0]), 0, 2).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.bin_edges, vec![0.0, 1.5, 3.0]);
    }

    #[test]
    fn histogram_rejects_bad_arguments() {
        let r = one_band(vec![0.0, 1.0]);
        assert!(band_histogram(&r, 0, 0).is_err());
        assert!(band_histogram(&r, 1, 4).is_err());
    }

    #[test]
    fn symmetric_data_has_zero_skewness() {
        let values: Vec<f64> = [-1.0, 0.0, 1.0].iter().cycle().take(12).copied().collect();
        let m = band_moments(&one_band(values), 0).unwrap();
        assert_eq!(m.skewness, Some(0.0));
        assert!(m.mean.abs() < 1e-15);
    }

    #[test]
    fn hand_computed_moments() {
        // mean 1/4; deviations -1/4 (x3), 3/4
        // m2 = (3/16 + 9/16)/4 = 3/16, m3 = (-3/64 + 27/64)/4 = 3/32
        // m4 = (3/256 + 81/256)/4 = 21/256
        let m = band_moments(&one_band(vec![0.0, 0.0, 0.0, 1.0]), 0).unwrap();
        assert_eq!(m.mean, 0.25);
        assert_eq!(m.variance, 0.1875);
        let m3 = 0.09375_f64;
        let expected_skew = m3 / libm::pow(0.1875, 1.5);
        assert!((m.skewness.unwrap() - expected_skew).abs() < 1e-12);
        assert!((m.skewness.unwrap() - 1.154_700_538_379_251_5).abs() < 1e-12);
        let expected_kurt = (21.0 / 256.0) / (0.1875 * 0.1875) - 3.0;
        assert!((m.excess_kurtosis.unwrap() - expected_kurt).abs() < 1e-12);
        assert_eq!(m.verdict, NormalityVerdict::Skewed);
    }

    #[test]
    fn constant_band_is_degenerate() {
        let m = band_moments(&one_band(vec![3.0; 8]), 0).unwrap();
        assert_eq!(m.verdict, NormalityVerdict::Degenerate);
        assert_eq!(m.variance, 0.0);
        assert!(m.skewness.is_none());
    }

    #[test]
    fn too_few_pixels() {
        assert!(band_moments(&one_band(vec![1.0, 2.0, 3.0]), 0).is_err());
    }

    #[test]
    fn verdict_thresholds() {
        let t = NormalityThresholds::default();
        assert_eq!(t.verdict(0.1, 0.2), NormalityVerdict::ApproximatelyNormal);
        assert_eq!(t.verdict(-0.7, 0.2), NormalityVerdict::Skewed);
        assert_eq!(t.verdict(0.1, -1.5), NormalityVerdict::HeavyTailed);
    }
}
