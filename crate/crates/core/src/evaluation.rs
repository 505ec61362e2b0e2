//! Accuracy assessment: error matrix, overall/producer/user accuracy, kappa and class areas.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, LabelMask, Result};

/// Error matrix with predicted classes as rows and ground-truth classes as columns.
///
/// Row 0 holds pixels left unclassified (predicted label 0); rows `1..=C`
/// follow `class_ids`. Columns follow `class_ids`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    class_ids: Vec<u32>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// `counts` is `(C+1) × C`, row-major, unclassified row first.
    pub fn from_counts(class_ids: Vec<u32>, counts: Vec<u64>) -> Result<Self> {
        let c = class_ids.len();
        if c == 0 {
            return Err(Error::InvalidArgument(
                "confusion matrix needs at least one class".into(),
            ));
        }
        if class_ids.contains(&0) {
            return Err(Error::InvalidArgument(
                "class id 0 is the unclassified row, not a class".into(),
            ));
        }
        if class_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "class ids must be strictly ascending".into(),
            ));
        }
        if counts.len() != (c + 1) * c {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for {c} classes, expected {}",
                counts.len(),
                (c + 1) * c
            )));
        }
        Ok(Self { class_ids, counts })
    }

    /// Square `C × C` counts (no unclassified pixels).
    pub fn from_square(class_ids: Vec<u32>, square: &[u64]) -> Result<Self> {
        let c = class_ids.len();
        let mut counts = vec![0; c];
        counts.extend_from_slice(square);
        Self::from_counts(class_ids, counts)
    }

    pub fn class_ids(&self) -> &[u32] {
        &self.class_ids
    }

    pub fn classes(&self) -> usize {
        self.class_ids.len()
    }

    /// All `(C+1) × C` cells, unclassified row first.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Cell at matrix row `row` (0 = unclassified) and truth column `col`.
    pub fn cell(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.classes() + col]
    }

    /// Count of pixels of truth class `truth` predicted as `predicted` (0 = unclassified).
    pub fn count(&self, predicted: u32, truth: u32) -> Option<u64> {
        let col = self.class_ids.binary_search(&truth).ok()?;
        let row = if predicted == 0 {
            0
        } else {
            self.class_ids.binary_search(&predicted).ok()? + 1
        };
        Some(self.cell(row, col))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn diagonal(&self) -> Vec<u64> {
        (0..self.classes()).map(|k| self.cell(k + 1, k)).collect()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        let c = self.classes();
        self.counts.chunks(c).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let c = self.classes();
        (0..c)
            .map(|col| (0..=c).map(|row| self.cell(row, col)).sum())
            .collect()
    }
}

/// Tallies `(predicted, truth)` over every pixel whose truth label is nonzero.
///
/// Columns cover every class in either mask's class table.
pub fn confusion_matrix(predicted: &LabelMask, truth: &LabelMask) -> Result<ConfusionMatrix> {
    if !predicted.same_shape(truth.width(), truth.height()) {
        return Err(Error::DimensionMismatch(format!(
            "predicted map is {}x{}, truth is {}x{}",
            predicted.width(),
            predicted.height(),
            truth.width(),
            truth.height()
        )));
    }
    let ids: BTreeSet<u32> = truth
        .class_table()
        .ids()
        .chain(predicted.class_table().ids())
        .collect();
    let class_ids: Vec<u32> = ids.into_iter().collect();
    let c = class_ids.len();
    let position = |id: u32| class_ids.binary_search(&id).ok();
    let mut counts = vec![0u64; (c + 1) * c];
    let mut evaluated = 0usize;
    for (&p, &t) in predicted.labels().iter().zip(truth.labels()) {
        if t == 0 {
            continue;
        }
        evaluated += 1;
        // both ids are covered by the class tables (LabelMask invariant)
        let col = position(t).expect("truth label in class table");
        let row = if p == 0 {
            0
        } else {
            position(p).expect("predicted label in class table") + 1
        };
        counts[row * c + col] += 1;
    }
    if evaluated == 0 {
        return Err(Error::InvalidLabels(
            "truth mask has no labeled pixels".into(),
        ));
    }
    ConfusionMatrix::from_counts(class_ids, counts)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClassAccuracy {
    pub class_id: u32,
    /// Diagonal over the truth column total; `None` when the column is empty.
    pub producer_accuracy: Option<f64>,
    /// Diagonal over the predicted row total; `None` when nothing was predicted as this class.
    pub user_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AccuracyReport {
    pub total: u64,
    pub correct: u64,
    pub overall_accuracy: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    /// `None` when expected agreement is 1 and kappa is undefined.
    pub kappa: Option<f64>,
    pub classes: Vec<ClassAccuracy>,
}

impl AccuracyReport {
    pub fn producer_accuracy(&self) -> Vec<Option<f64>> {
        self.classes.iter().map(|c| c.producer_accuracy).collect()
    }

    pub fn user_accuracy(&self) -> Vec<Option<f64>> {
        self.classes.iter().map(|c| c.user_accuracy).collect()
    }
}

/// Overall accuracy, Cohen's kappa and per-class accuracies.
///
/// Unclassified pixels are never correct. They add to the total but their
/// row has no matching column, so they contribute nothing to the chance
/// agreement `p_e = Σ_k row_k · col_k / total²`.
pub fn accuracy_report(cm: &ConfusionMatrix) -> Result<AccuracyReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    let n = total as f64;
    let diag = cm.diagonal();
    let rows = cm.row_sums();
    let cols = cm.column_sums();
    let correct: u64 = diag.iter().sum();
    let p_o = correct as f64 / n;
    let p_e: f64 = (0..cm.classes())
        .map(|k| rows[k + 1] as f64 * cols[k] as f64)
        .sum::<f64>()
        / (n * n);
    let kappa = if p_e < 1.0 {
        Some((p_o - p_e) / (1.0 - p_e))
    } else {
        None
    };
    let classes = cm
        .class_ids()
        .iter()
        .enumerate()
        .map(|(k, &class_id)| ClassAccuracy {
            class_id,
            producer_accuracy: (cols[k] > 0).then(|| diag[k] as f64 / cols[k] as f64),
            user_accuracy: (rows[k + 1] > 0).then(|| diag[k] as f64 / rows[k + 1] as f64),
        })
        .collect();
    Ok(AccuracyReport {
        total,
        correct,
        overall_accuracy: p_o,
        observed_agreement: p_o,
        expected_agreement: p_e,
        kappa,
        classes,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AreaEntry {
    /// 0 for unclassified.
    pub class_id: u32,
    pub name: String,
    pub pixel_count: u64,
    pub percent: f64,
    pub area_m2: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AreaReport {
    pub pixel_size_m: f64,
    pub total_area_m2: f64,
    /// Unclassified first, then classes in ascending id order.
    pub entries: Vec<AreaEntry>,
}

impl AreaReport {
    pub fn entry(&self, class_id: u32) -> Option<&AreaEntry> {
        self.entries.iter().find(|e| e.class_id == class_id)
    }

    /// The class (excluding unclassified) with the largest area.
    pub fn largest_class(&self) -> Option<&AreaEntry> {
        self.entries
            .iter()
            .filter(|e| e.class_id != 0)
            .fold(None, |best: Option<&AreaEntry>, e| match best {
                Some(b) if b.pixel_count >= e.pixel_count => Some(b),
                _ => Some(e),
            })
    }
}

/// Percentage share of each value in the total.
pub fn percent_shares(amounts: &[f64]) -> Vec<f64> {
    let total: f64 = amounts.iter().sum();
    amounts.iter().map(|a| 100.0 * a / total).collect()
}

/// Pixel count, percent of the image and ground area per class, unclassified included.
pub fn area_report(classmap: &LabelMask, pixel_size: f64) -> Result<AreaReport> {
    if !(pixel_size.is_finite() && pixel_size > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pixel size must be positive, got {pixel_size}"
        )));
    }
    let table = classmap.class_table();
    let ids: Vec<u32> = core::iter::once(0).chain(table.ids()).collect();
    let mut counts = vec![0u64; ids.len()];
    for &l in classmap.labels() {
        let k = ids.binary_search(&l).expect("label in class table");
        counts[k] += 1;
    }
    let cell = pixel_size * pixel_size;
    let total = classmap.labels().len() as f64;
    let entries = ids
        .iter()
        .zip(&counts)
        .map(|(&class_id, &pixel_count)| AreaEntry {
            class_id,
            name: match table.get(class_id) {
                Some(info) => info.name.clone(),
                None => String::from("Unclassified"),
            },
            pixel_count,
            percent: 100.0 * pixel_count as f64 / total,
            area_m2: pixel_count as f64 * cell,
        })
        .collect();
    Ok(AreaReport {
        pixel_size_m: pixel_size,
        total_area_m2: total * cell,
        entries,
    })
}
