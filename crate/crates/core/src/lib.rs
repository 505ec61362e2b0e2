//! Multispectral raster classification core.
//!
//! Everything in this crate is pure computation over in-memory data and
//! builds without `std` (only `alloc` is required). File formats, the
//! pipeline driver and the command line live in the `specclass` crate.
//!
//! The modules follow the processing chain:
//!
//! * [`raster`]: band-sequential rasters and class label masks
//! * [`spectral_stats`]: per-band histograms and moment-based normality checks
//! * [`weierstrass`]: Gaussian kernels and the Weierstrass (Gauss) transform
//! * [`pca`]: cross-band statistics, principal components, redundant band removal
//! * [`sampling`]: seeded stratified training-pixel selection
//! * [`mlc`]: per-class Gaussian models and the maximum-likelihood decision rule
//! * [`evaluation`]: confusion matrix, overall/producer/user accuracy, kappa, areas
//! * [`scenegen`]: deterministic synthetic scenes with known ground truth
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub mod evaluation;
pub mod linalg;
pub mod mlc;
pub mod pca;
pub mod raster;
pub mod rng;
pub mod sampling;
pub mod scenegen;
pub mod spectral_stats;
pub mod weierstrass;

pub use error::{Error, Result};
pub use raster::{ClassInfo, ClassTable, LabelMask, Raster};
