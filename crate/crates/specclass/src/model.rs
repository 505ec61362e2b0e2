//! JSON model files: `{band_count, threshold, bands, models: [{class_id, prior, mean, covariance}]}`.

use serde::{Deserialize, Serialize};
use specclass_core::linalg::SquareMatrix;
use specclass_core::mlc::{ClassModel, ClassModelSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub class_id: u32,
    pub prior: f64,
    pub mean: Vec<f64>,
    /// Row-major `band_count × band_count`.
    pub covariance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub band_count: usize,
    pub threshold: Option<f64>,
    /// Raster bands the features were taken from, when a subset was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<Vec<usize>>,
    pub models: Vec<ModelEntry>,
}

impl ModelFile {
    pub fn from_models(set: &ClassModelSet, bands: Option<Vec<usize>>) -> Self {
        Self {
            band_count: set.band_count(),
            threshold: set.threshold(),
            bands,
            models: set
                .models()
                .iter()
                .map(|m| ModelEntry {
                    class_id: m.class_id(),
                    prior: m.prior(),
                    mean: m.mean().to_vec(),
                    covariance: m.covariance().as_slice().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_models(&self) -> specclass_core::Result<ClassModelSet> {
        let b = self.band_count;
        let models = self
            .models
            .iter()
            .map(|e| {
                if e.mean.len() != b || e.covariance.len() != b * b {
                    return Err(specclass_core::Error::DimensionMismatch(format!(
                        "class {} does not match band_count {b}",
                        e.class_id
                    )));
                }
                let cov = SquareMatrix::from_row_major(b, e.covariance.clone())?;
                ClassModel::new(e.class_id, e.prior, e.mean.clone(), cov)
            })
            .collect::<specclass_core::Result<Vec<_>>>()?;
        ClassModelSet::new(models, self.threshold)
    }
}
