//! Maximum-likelihood classification with per-class multivariate Gaussians.
//!
//! Each class `i` has mean `μᵢ`, covariance `Σᵢ` and prior `P(i)`. A feature
//! vector `θ` is scored with the log discriminant
//!
//! ```text
//! gᵢ(θ) = ln P(i) − ½ ln|Σᵢ| − ½ (θ − μᵢ)ᵀ Σᵢ⁻¹ (θ − μᵢ)
//! ```
//!
//! which is `ln(p(θ|i) P(i))` up to the constant `−(B/2) ln 2π` shared by all
//! classes. The posterior `P(i|θ)` is therefore the softmax of the `gᵢ`, and
//! the decision is the class with the largest `gᵢ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Cholesky, SquareMatrix};
use crate::sampling::TrainingSet;
use crate::{ClassTable, Error, LabelMask, Raster, Result};

/// Default ridge, as a fraction of the mean covariance diagonal.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
/// Ridge used when a class covariance is identically zero.
pub const DEGENERATE_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PriorsMode {
    #[default]
    Uniform,
    /// Proportional to each class's training pixel count.
    Proportional,
}

impl core::str::FromStr for PriorsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "proportional" => Ok(Self::Proportional),
            other => Err(Error::InvalidArgument(format!(
                "unknown priors mode '{other}' (expected uniform or proportional)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    class_id: u32,
    mean: Vec<f64>,
    covariance: SquareMatrix,
    prior: f64,
    log_det_cov: f64,
    precision: SquareMatrix,
    chol: Cholesky,
}

impl ClassModel {
    /// Builds a model from final (already regularized) parameters.
    pub fn new(
        class_id: u32,
        prior: f64,
        mean: Vec<f64>,
        covariance: SquareMatrix,
    ) -> Result<Self> {
        if class_id == 0 {
            return Err(Error::InvalidArgument("class id 0 is reserved".into()));
        }
        if !(prior > 0.0 && prior <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "prior of class {class_id} must lie in (0, 1], got {prior}"
            )));
        }
        if mean.len() != covariance.dim() {
            return Err(Error::DimensionMismatch(format!(
                "class {class_id}: mean has {} entries, covariance is {}x{}",
                mean.len(),
                covariance.dim(),
                covariance.dim()
            )));
        }
        if mean
            .iter()
            .chain(covariance.as_slice())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite(format!("parameters of class {class_id}")));
        }
        if !covariance.is_symmetric(1e-12) {
            return Err(Error::NotSymmetric);
        }
        let chol = covariance
            .cholesky()
            .ok_or(Error::NotPositiveDefinite { class_id })?;
        Ok(Self {
            class_id,
            log_det_cov: chol.log_det(),
            precision: chol.inverse(),
            mean,
            covariance,
            prior,
            chol,
        })
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &SquareMatrix {
        &self.covariance
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    /// `ln |Σ|`.
    pub fn log_det_cov(&self) -> f64 {
        self.log_det_cov
    }

    /// `Σ⁻¹`.
    pub fn precision(&self) -> &SquareMatrix {
        &self.precision
    }

    /// `gᵢ(θ)`; `diff` and `scratch` are workspaces of length B.
    #[inline]
    fn discriminant_with(&self, feature: &[f64], diff: &mut [f64], scratch: &mut [f64]) -> f64 {
        for ((d, x), m) in diff.iter_mut().zip(feature).zip(&self.mean) {
            *d = x - m;
        }
        let q = self.chol.quad_form(diff, scratch);
        libm::log(self.prior) - 0.5 * self.log_det_cov - 0.5 * q
    }

    pub fn discriminant(&self, feature: &[f64]) -> f64 {
        let b = self.mean.len();
        let mut diff = vec![0.0; b];
        let mut scratch = vec![0.0; b];
        self.discriminant_with(feature, &mut diff, &mut scratch)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassModelSet {
    /// Sorted by ascending class id.
    models: Vec<ClassModel>,
    band_count: usize,
    threshold: Option<f64>,
}

impl ClassModelSet {
    pub fn new(mut models: Vec<ClassModel>, threshold: Option<f64>) -> Result<Self> {
        let Some(first) = models.first() else {
            return Err(Error::InvalidArgument(
                "at least one class model is required".into(),
            ));
        };
        let band_count = first.mean.len();
        if let Some(m) = models.iter().find(|m| m.mean.len() != band_count) {
            return Err(Error::DimensionMismatch(format!(
                "class {} has {} bands, class {} has {band_count}",
                m.class_id,
                m.mean.len(),
                first.class_id
            )));
        }
        models.sort_by_key(|m| m.class_id);
        if models.windows(2).any(|w| w[0].class_id == w[1].class_id) {
            return Err(Error::InvalidArgument(
                "duplicate class id in model set".into(),
            ));
        }
        let total: f64 = models.iter().map(|m| m.prior).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "priors sum to {total}, not 1"
            )));
        }
        if threshold.is_some_and(f64::is_nan) {
            return Err(Error::InvalidArgument("threshold is NaN".into()));
        }
        Ok(Self {
            models,
            band_count,
            threshold,
        })
    }

    pub fn models(&self) -> &[ClassModel] {
        &self.models
    }

    pub fn band_count(&self) -> usize {
        self.band_count
    }

    /// Minimum log discriminant for a pixel to be assigned; `None` assigns every pixel.
    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn with_threshold(mut self, threshold: Option<f64>) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn class_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.models.iter().map(|m| m.class_id)
    }

    fn check_feature(&self, feature: &[f64]) -> Result<()> {
        if feature.len() != self.band_count {
            return Err(Error::DimensionMismatch(format!(
                "feature has {} values, models expect {}",
                feature.len(),
                self.band_count
            )));
        }
        if feature.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector".into()));
        }
        Ok(())
    }

    /// Decision only, without allocating.
    #[inline]
    fn decide_with(&self, feature: &[f64], diff: &mut [f64], scratch: &mut [f64]) -> u32 {
        let mut best = f64::NEG_INFINITY;
        let mut best_id = self.models[0].class_id;
        for m in &self.models {
            let g = m.discriminant_with(feature, diff, scratch);
            // strict comparison keeps the smaller id on ties
            if g > best {
                best = g;
                best_id = m.class_id;
            }
        }
        match self.threshold {
            Some(t) if best < t => 0,
            _ => best_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    /// `(class id, gᵢ)` in ascending id order.
    pub discriminants: Vec<(u32, f64)>,
    /// `P(i|θ)` in the same order.
    pub posteriors: Vec<f64>,
    /// Winning class, or 0 when below the threshold.
    pub decision: u32,
}

/// Picks the class with the largest discriminant from `(class id, gᵢ)` pairs
/// given in ascending id order; ties keep the smaller id. Returns 0 when the
/// list is empty or the best score falls below `threshold`.
pub fn decide(discriminants: &[(u32, f64)], threshold: Option<f64>) -> u32 {
    let mut best = f64::NEG_INFINITY;
    let mut best_id = 0;
    for &(id, g) in discriminants {
        if g > best {
            best = g;
            best_id = id;
        }
    }
    match threshold {
        Some(t) if best < t => 0,
        _ => best_id,
    }
}

/// Estimates one Gaussian per class from the training set.
///
/// The covariance is the population covariance plus `regularization` times
/// the mean of its diagonal on the diagonal. An all-zero covariance gets
/// [`DEGENERATE_RIDGE`] on the diagonal instead.
pub fn fit_class_models(
    train: &TrainingSet,
    priors_mode: PriorsMode,
    regularization: f64,
) -> Result<ClassModelSet> {
    if !(regularization >= 0.0 && regularization.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "regularization must be nonnegative, got {regularization}"
        )));
    }
    let counts = train.per_class_counts();
    if counts.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let b = train.band_count;
    let total = train.len() as f64;
    let class_count = counts.len() as f64;
    let mut models = Vec::with_capacity(counts.len());
    for (&class_id, &n) in &counts {
        if n < 2 {
            return Err(Error::InsufficientSamples {
                class_id,
                available: n,
                required: 2,
            });
        }
        let nf = n as f64;
        let mut mean = vec![0.0; b];
        for e in train.class_entries(class_id) {
            for (m, x) in mean.iter_mut().zip(&e.features) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut cov = SquareMatrix::zeros(b);
        for e in train.class_entries(class_id) {
            for p in 0..b {
                let dp = e.features[p] - mean[p];
                for q in p..b {
                    cov[(p, q)] += dp * (e.features[q] - mean[q]);
                }
            }
        }
        for p in 0..b {
            for q in p..b {
                let v = cov[(p, q)] / nf;
                cov[(p, q)] = v;
                cov[(q, p)] = v;
            }
        }
        let diag_mean = cov.trace() / b as f64;
        let ridge = if cov.as_slice().iter().all(|&v| v == 0.0) {
            DEGENERATE_RIDGE
        } else {
            regularization * diag_mean
        };
        for k in 0..b {
            cov[(k, k)] += ridge;
        }
        let prior = match priors_mode {
            PriorsMode::Uniform => 1.0 / class_count,
            PriorsMode::Proportional => nf / total,
        };
        models.push(ClassModel::new(class_id, prior, mean, cov)?);
    }
    ClassModelSet::new(models, None)
}

/// Scores one feature vector against every class.
pub fn classify_pixel(models: &ClassModelSet, feature: &[f64]) -> Result<ClassScores> {
    models.check_feature(feature)?;
    let b = models.band_count;
    let mut diff = vec![0.0; b];
    let mut scratch = vec![0.0; b];
    let discriminants: Vec<(u32, f64)> = models
        .models
        .iter()
        .map(|m| {
            (
                m.class_id,
                m.discriminant_with(feature, &mut diff, &mut scratch),
            )
        })
        .collect();
    let max = discriminants
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &(_, g)| acc.max(g));
    let weights: Vec<f64> = discriminants
        .iter()
        .map(|&(_, g)| libm::exp(g - max))
        .collect();
    let norm: f64 = weights.iter().sum();
    let posteriors = weights.iter().map(|w| w / norm).collect();
    let decision = models.decide_with(feature, &mut diff, &mut scratch);
    Ok(ClassScores {
        discriminants,
        posteriors,
        decision,
    })
}

/// Labels every pixel; `band_subset` picks which raster bands form the feature vector.
///
/// The result carries a generic class table naming each model's class.
pub fn classify_raster(
    raster: &Raster,
    models: &ClassModelSet,
    band_subset: Option<&[usize]>,
) -> Result<LabelMask> {
    let bands = resolve_bands(raster, models, band_subset)?;
    let mut labels = vec![0u32; raster.pixel_count()];
    classify_pixels_into(raster, models, &bands, 0, &mut labels);
    LabelMask::new(
        raster.width(),
        raster.height(),
        labels,
        ClassTable::generic(models.class_ids())?,
    )
}

/// Validates a band subset against the raster and models; `None` means all bands.
pub fn resolve_bands(
    raster: &Raster,
    models: &ClassModelSet,
    band_subset: Option<&[usize]>,
) -> Result<Vec<usize>> {
    let bands: Vec<usize> = match band_subset {
        Some(s) => s.to_vec(),
        None => (0..raster.bands()).collect(),
    };
    if bands.len() != models.band_count {
        return Err(Error::DimensionMismatch(format!(
            "{} bands selected, models expect {}",
            bands.len(),
            models.band_count
        )));
    }
    if let Some(&b) = bands.iter().find(|&&b| b >= raster.bands()) {
        return Err(Error::InvalidArgument(format!(
            "band {b} out of range for a {}-band raster",
            raster.bands()
        )));
    }
    Ok(bands)
}

/// Classifies the pixels `start .. start + out.len()` (row-major indices) into `out`.
///
/// Pixels are independent, so callers may split a raster into disjoint
/// chunks and classify them concurrently.
pub fn classify_pixels_into(
    raster: &Raster,
    models: &ClassModelSet,
    bands: &[usize],
    start: usize,
    out: &mut [u32],
) {
    let b = bands.len();
    let mut feature = vec![0.0; b];
    let mut diff = vec![0.0; b];
    let mut scratch = vec![0.0; b];
    let planes: Vec<&[f64]> = bands.iter().map(|&k| raster.band(k)).collect();
    for (offset, slot) in out.iter_mut().enumerate() {
        let i = start + offset;
        for (f, plane) in feature.iter_mut().zip(&planes) {
            *f = plane[i];
        }
        *slot = models.decide_with(&feature, &mut diff, &mut scratch);
    }
}
