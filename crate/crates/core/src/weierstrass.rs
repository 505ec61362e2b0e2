//! Discrete Gaussian kernels and the Weierstrass (Gauss) transform.
//!
//! The continuous transform convolves with `exp(-x²/4) / sqrt(4π)`, a Gaussian
//! of variance 2, so [`WEIERSTRASS_SIGMA`] is `√2`. Kernels are sampled at
//! integer offsets, truncated at `ceil(truncation · σ)` and renormalized to
//! sum to one.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Raster, Result};

pub const WEIERSTRASS_SIGMA: f64 = core::f64::consts::SQRT_2;
pub const DEFAULT_TRUNCATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BoundaryMode {
    /// Half-sample symmetric: `... b a | a b c ... x y z | z y ...`
    #[default]
    Reflect,
    /// Edge sample repeated.
    Replicate,
    /// Samples outside the image are zero.
    Zero,
}

impl BoundaryMode {
    /// Maps a possibly out-of-range coordinate onto `0..len`, or `None` for zero padding.
    #[inline]
    pub fn resolve(self, index: isize, len: usize) -> Option<usize> {
        let n = len as isize;
        if (0..n).contains(&index) {
            return Some(index as usize);
        }
        match self {
            BoundaryMode::Zero => None,
            BoundaryMode::Replicate => Some(index.clamp(0, n - 1) as usize),
            BoundaryMode::Reflect => {
                let period = 2 * n;
                let i = index.rem_euclid(period);
                Some(if i < n { i } else { period - 1 - i } as usize)
            }
        }
    }
}

impl core::str::FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflect" => Ok(Self::Reflect),
            "replicate" => Ok(Self::Replicate),
            "zero" => Ok(Self::Zero),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary mode '{other}' (expected reflect, replicate or zero)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelWeights {
    /// `2r+1` taps applied along rows and then along columns.
    Separable(Vec<f64>),
    /// `(2r+1)²` weights, row-major; row index is the y offset, column index the x offset.
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
    radius: usize,
    weights: KernelWeights,
}

impl GaussianKernel {
    /// The classical Weierstrass kernel: σ = √2 on both axes, truncated at 3σ.
    pub fn weierstrass() -> Self {
        build_kernel_1d(WEIERSTRASS_SIGMA, DEFAULT_TRUNCATION).expect("valid constants")
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Taps per axis.
    pub fn size(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.weights, KernelWeights::Separable(_))
    }

    /// Full 2-D weight grid; the outer product of the taps for a separable kernel.
    pub fn to_grid(&self) -> Vec<f64> {
        match &self.weights {
            KernelWeights::Grid(g) => g.clone(),
            KernelWeights::Separable(taps) => taps
                .iter()
                .flat_map(|&wy| taps.iter().map(move |&wx| wy * wx))
                .collect(),
        }
    }
}

fn check_truncation(truncation: f64) -> Result<()> {
    if !(truncation.is_finite() && truncation >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation must be at least 1 sigma, got {truncation}"
        )));
    }
    Ok(())
}

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {sigma}"
        )));
    }
    Ok(())
}

fn radius_for(sigma: f64, truncation: f64) -> usize {
    (libm::ceil(truncation * sigma) as usize).max(1)
}

fn normalize(weights: &mut [f64]) {
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
}

/// Separable isotropic kernel with taps proportional to `exp(-k²/(2σ²))`.
pub fn build_kernel_1d(sigma: f64, truncation: f64) -> Result<GaussianKernel> {
    check_sigma("sigma", sigma)?;
    check_truncation(truncation)?;
    let radius = radius_for(sigma, truncation);
    let r = radius as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|k| {
            let x = k as f64 / sigma;
            libm::exp(-0.5 * x * x)
        })
        .collect();
    normalize(&mut taps);
    Ok(GaussianKernel {
        sigma_x: sigma,
        sigma_y: sigma,
        rho: 0.0,
        radius,
        weights: KernelWeights::Separable(taps),
    })
}

/// Full-grid kernel sampled from the centered bivariate normal density with
/// standard deviations `sigma_x`, `sigma_y` and correlation `rho`.
pub fn build_kernel_2d(
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
    truncation: f64,
) -> Result<GaussianKernel> {
    check_sigma("sigma_x", sigma_x)?;
    check_sigma("sigma_y", sigma_y)?;
    check_truncation(truncation)?;
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "correlation must lie in (-1, 1), got {rho}"
        )));
    }
    let radius = radius_for(sigma_x.max(sigma_y), truncation);
    let r = radius as isize;
    let denom = 2.0 * (1.0 - rho * rho);
    let mut grid = Vec::with_capacity((2 * radius + 1) * (2 * radius + 1));
    for j in -r..=r {
        let v = j as f64 / sigma_y;
        for i in -r..=r {
            let u = i as f64 / sigma_x;
            grid.push(libm::exp(-(u * u + v * v - 2.0 * rho * u * v) / denom));
        }
    }
    normalize(&mut grid);
    Ok(GaussianKernel {
        sigma_x,
        sigma_y,
        rho,
        radius,
        weights: KernelWeights::Grid(grid),
    })
}

/// Convolves one row-major band with the kernel.
pub fn convolve_band(
    band: &[f64],
    width: usize,
    height: usize,
    kernel: &GaussianKernel,
    boundary: BoundaryMode,
) -> Vec<f64> {
    debug_assert_eq!(band.len(), width * height);
    match &kernel.weights {
        KernelWeights::Separable(taps) => {
            let tmp = pass_rows(band, width, height, taps, boundary);
            pass_columns(&tmp, width, height, taps, boundary)
        }
        KernelWeights::Grid(grid) => {
            convolve_grid(band, width, height, grid, kernel.radius, boundary)
        }
    }
}

fn pass_rows(
    src: &[f64],
    width: usize,
    height: usize,
    taps: &[f64],
    boundary: BoundaryMode,
) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &w) in taps.iter().enumerate() {
                if let Some(xx) = boundary.resolve(x as isize + k as isize - r, width) {
                    acc += w * row[xx];
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

fn pass_columns(
    src: &[f64],
    width: usize,
    height: usize,
    taps: &[f64],
    boundary: BoundaryMode,
) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        let dst = &mut out[y * width..(y + 1) * width];
        for (k, &w) in taps.iter().enumerate() {
            if let Some(yy) = boundary.resolve(y as isize + k as isize - r, height) {
                let row = &src[yy * width..(yy + 1) * width];
                for (d, &s) in dst.iter_mut().zip(row) {
                    *d += w * s;
                }
            }
        }
    }
    out
}

fn convolve_grid(
    src: &[f64],
    width: usize,
    height: usize,
    grid: &[f64],
    radius: usize,
    boundary: BoundaryMode,
) -> Vec<f64> {
    let size = 2 * radius + 1;
    let r = radius as isize;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for ky in 0..size {
                let Some(yy) = boundary.resolve(y as isize + ky as isize - r, height) else {
                    continue;
                };
                for kx in 0..size {
                    if let Some(xx) = boundary.resolve(x as isize + kx as isize - r, width) {
                        // The kernel is point-symmetric, so correlation equals convolution.
                        acc += grid[ky * size + kx] * src[yy * width + xx];
                    }
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Applies the transform to every band independently.
pub fn apply_transform(
    raster: &Raster,
    kernel: &GaussianKernel,
    boundary: BoundaryMode,
) -> Result<Raster> {
    let mut data = Vec::with_capacity(raster.data().len());
    for b in 0..raster.bands() {
        data.extend(convolve_band(
            raster.band(b),
            raster.width(),
            raster.height(),
            kernel,
            boundary,
        ));
    }
    raster.with_data(data)
}
