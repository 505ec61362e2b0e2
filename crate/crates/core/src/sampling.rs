//! Stratified random selection of training pixels.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::rng::SeededRng;
use crate::{Error, LabelMask, Raster, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingEntry {
    pub row: usize,
    pub col: usize,
    pub class_id: u32,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub entries: Vec<TrainingEntry>,
    pub seed: u64,
    pub band_count: usize,
}

impl TrainingSet {
    pub fn new(entries: Vec<TrainingEntry>, seed: u64, band_count: usize) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.features.len() != band_count) {
            return Err(Error::DimensionMismatch(alloc::format!(
                "entry at ({}, {}) has {} features, expected {band_count}",
                e.row,
                e.col,
                e.features.len()
            )));
        }
        if entries.iter().any(|e| e.class_id == 0) {
            return Err(Error::InvalidLabels(
                "training entries must not use class 0".into(),
            ));
        }
        Ok(Self {
            entries,
            seed,
            band_count,
        })
    }

    pub fn per_class_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.class_id).or_insert(0) += 1;
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one class, in set order.
    pub fn class_entries(&self, class_id: u32) -> impl Iterator<Item = &TrainingEntry> {
        self.entries.iter().filter(move |e| e.class_id == class_id)
    }

    /// Same coordinates and classes, features read from another raster.
    pub fn reextract(&self, raster: &Raster) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                if e.row >= raster.height() || e.col >= raster.width() {
                    return Err(Error::DimensionMismatch(alloc::format!(
                        "pixel ({}, {}) lies outside a {}x{} raster",
                        e.row,
                        e.col,
                        raster.width(),
                        raster.height()
                    )));
                }
                Ok(TrainingEntry {
                    features: raster.pixel(e.row, e.col),
                    ..e.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entries,
            seed: self.seed,
            band_count: raster.bands(),
        })
    }

    /// A label mask with only this set's pixels labeled.
    pub fn to_mask(
        &self,
        width: usize,
        height: usize,
        class_table: crate::ClassTable,
    ) -> Result<LabelMask> {
        let mut labels = alloc::vec![0u32; width * height];
        for e in &self.entries {
            if e.row >= height || e.col >= width {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "pixel ({}, {}) lies outside {width}x{height}",
                    e.row,
                    e.col
                )));
            }
            labels[e.row * width + e.col] = e.class_id;
        }
        LabelMask::new(width, height, labels, class_table)
    }
}

/// Draws exactly `per_class` pixels, without replacement, from each class present in `labels`.
///
/// Classes are visited in ascending id order. Each stratum lists its pixels
/// in row-major order and a partial Fisher–Yates shuffle, fed by one stream
/// seeded with `seed`, picks the sample.
pub fn stratified_sample(
    labels: &LabelMask,
    raster: &Raster,
    per_class: usize,
    seed: u64,
) -> Result<TrainingSet> {
    if per_class == 0 {
        return Err(Error::InvalidArgument(
            "per-class sample count must be at least 1".into(),
        ));
    }
    if !labels.same_shape(raster.width(), raster.height()) {
        return Err(Error::DimensionMismatch(alloc::format!(
            "labels are {}x{}, raster is {}x{}",
            labels.width(),
            labels.height(),
            raster.width(),
            raster.height()
        )));
    }
    let mut strata: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.labels().iter().enumerate() {
        if l != 0 {
            strata.entry(l).or_default().push(i);
        }
    }
    if let Some((&class_id, pixels)) = strata.iter().find(|(_, p)| p.len() < per_class) {
        return Err(Error::InsufficientSamples {
            class_id,
            available: pixels.len(),
            required: per_class,
        });
    }
    let mut rng = SeededRng::new(seed);
    let width = raster.width();
    let mut entries = Vec::with_capacity(per_class * strata.len());
    for (class_id, mut pixels) in strata {
        rng.partial_shuffle(&mut pixels, per_class);
        for &i in &pixels[..per_class] {
            let (row, col) = (i / width, i % width);
            entries.push(TrainingEntry {
                row,
                col,
                class_id,
                features: raster.pixel(row, col),
            });
        }
    }
    TrainingSet::new(entries, seed, raster.bands())
}

/// Per-class split into training and evaluation sets.
///
/// Each class gets `round(train_fraction · n)` training entries, clamped so
/// both sides keep at least one. Entries are shuffled per class (ascending
/// class id) with one stream seeded by `seed`.
pub fn split_train_eval(
    set: &TrainingSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(TrainingSet, TrainingSet)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for (class_id, n) in set.per_class_counts() {
        if n < 2 {
            return Err(Error::InsufficientSamples {
                class_id,
                available: n,
                required: 2,
            });
        }
        let mut members: Vec<&TrainingEntry> = set.class_entries(class_id).collect();
        rng.partial_shuffle(&mut members, n);
        let n_train = (libm::round(train_fraction * n as f64) as usize).clamp(1, n - 1);
        train.extend(members[..n_train].iter().map(|e| (*e).clone()));
        eval.extend(members[n_train..].iter().map(|e| (*e).clone()));
    }
    Ok((
        TrainingSet::new(train, seed, set.band_count)?,
        TrainingSet::new(eval, seed, set.band_count)?,
    ))
}
