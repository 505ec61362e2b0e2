//! Thread-pool wrappers around the pure core routines.
//!
//! Work is split into fixed, disjoint pieces (bands or pixel chunks) whose
//! results are written in place, so output never depends on scheduling.

use rayon::prelude::*;
use specclass_core::mlc::{classify_pixels_into, resolve_bands, ClassModelSet};
use specclass_core::weierstrass::{convolve_band, BoundaryMode, GaussianKernel};
use specclass_core::{ClassTable, LabelMask, Raster};

/// Environment variable capping worker threads; unset or 0 means one per core.
pub const THREADS_ENV: &str = "SPECCLASS_THREADS";

const PIXEL_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Parallelism {
    threads: usize,
}

impl Parallelism {
    /// `0` lets the pool pick the core count.
    pub fn threads(threads: usize) -> Self {
        Self { threads }
    }

    /// Reads [`THREADS_ENV`]; unparsable values fall back to automatic.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Self { threads }
    }

    pub fn thread_count(&self) -> usize {
        self.threads
    }

    /// Runs `f` inside a dedicated pool of the configured size.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
        {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
}

/// Convolves every band, one band per task.
pub fn transform(
    raster: &Raster,
    kernel: &GaussianKernel,
    boundary: BoundaryMode,
    par: Parallelism,
) -> specclass_core::Result<Raster> {
    let bands: Vec<Vec<f64>> = par.install(|| {
        (0..raster.bands())
            .into_par_iter()
            .map(|b| {
                convolve_band(
                    raster.band(b),
                    raster.width(),
                    raster.height(),
                    kernel,
                    boundary,
                )
            })
            .collect()
    });
    raster.with_data(bands.concat())
}

/// Classifies pixel chunks concurrently; the result equals the sequential classifier's.
pub fn classify_raster(
    raster: &Raster,
    models: &ClassModelSet,
    band_subset: Option<&[usize]>,
    par: Parallelism,
) -> specclass_core::Result<LabelMask> {
    let bands = resolve_bands(raster, models, band_subset)?;
    let mut labels = vec![0u32; raster.pixel_count()];
    par.install(|| {
        labels
            .par_chunks_mut(PIXEL_CHUNK)
            .enumerate()
            .for_each(|(k, chunk)| {
                classify_pixels_into(raster, models, &bands, k * PIXEL_CHUNK, chunk)
            });
    });
    LabelMask::new(
        raster.width(),
        raster.height(),
        labels,
        ClassTable::generic(models.class_ids())?,
    )
}
