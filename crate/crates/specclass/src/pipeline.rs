//! The end-to-end before/after comparison.
//!
//! Training pixels are sampled once on the original image; the transformed
//! branch re-extracts features at the same coordinates, and both branches use
//! the band subset chosen on the transformed image, so the transform is the
//! only difference between them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specclass_core::evaluation::{
    accuracy_report, area_report, confusion_matrix, AccuracyReport, AreaReport, ConfusionMatrix,
};
use specclass_core::mlc::{fit_class_models, ClassModelSet, PriorsMode, DEFAULT_REGULARIZATION};
use specclass_core::pca::{
    band_statistics, principal_components, select_bands, BandSelection, BandStatistics, PcaResult,
    DEFAULT_REDUNDANCY_THRESHOLD,
};
use specclass_core::sampling::{split_train_eval, stratified_sample, TrainingSet};
use specclass_core::weierstrass::{
    build_kernel_1d, build_kernel_2d, BoundaryMode, GaussianKernel, DEFAULT_TRUNCATION,
    WEIERSTRASS_SIGMA,
};
use specclass_core::{LabelMask, Raster};

use crate::error::{CliError, Result};
use crate::io;
use crate::model::ModelFile;
use crate::parallel::{self, Parallelism};
use crate::tables;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub sigma: f64,
    /// Vertical σ for an anisotropic kernel; defaults to `sigma`.
    pub sigma_y: Option<f64>,
    pub rho: f64,
    pub truncation: f64,
    pub boundary: BoundaryMode,
    pub pca_threshold: f64,
    pub per_class: usize,
    pub train_fraction: f64,
    pub priors: PriorsMode,
    pub regularization: f64,
    pub threshold: Option<f64>,
    pub seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            sigma: WEIERSTRASS_SIGMA,
            sigma_y: None,
            rho: 0.0,
            truncation: DEFAULT_TRUNCATION,
            boundary: BoundaryMode::Reflect,
            pca_threshold: DEFAULT_REDUNDANCY_THRESHOLD,
            per_class: 500,
            train_fraction: 0.7,
            priors: PriorsMode::Uniform,
            regularization: DEFAULT_REGULARIZATION,
            threshold: None,
            seed: 42,
        }
    }
}

impl PipelineParams {
    pub fn kernel(&self) -> specclass_core::Result<GaussianKernel> {
        match self.sigma_y {
            None if self.rho == 0.0 => build_kernel_1d(self.sigma, self.truncation),
            sy => build_kernel_2d(
                self.sigma,
                sy.unwrap_or(self.sigma),
                self.rho,
                self.truncation,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub image: PathBuf,
    pub labels: PathBuf,
    pub out_dir: PathBuf,
    pub params: PipelineParams,
    pub parallelism: Parallelism,
}

/// Results of classifying one version of the image.
#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub classmap: LabelMask,
    pub models: ClassModelSet,
    /// Held-out evaluation pixels.
    pub confusion: ConfusionMatrix,
    pub accuracy: AccuracyReport,
    /// Every labeled pixel of the scene.
    pub scene_confusion: ConfusionMatrix,
    pub scene_accuracy: AccuracyReport,
    pub area: AreaReport,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub params: PipelineParams,
    pub transformed: Raster,
    pub statistics: BandStatistics,
    pub pca: PcaResult,
    pub selection: BandSelection,
    /// Training and evaluation pixels with features from the original image.
    pub train: TrainingSet,
    pub eval: TrainingSet,
    pub before: BranchOutcome,
    pub after: BranchOutcome,
}

impl PipelineOutcome {
    pub fn delta_overall_accuracy(&self) -> f64 {
        self.after.accuracy.overall_accuracy - self.before.accuracy.overall_accuracy
    }

    pub fn delta_kappa(&self) -> Option<f64> {
        Some(self.after.accuracy.kappa? - self.before.accuracy.kappa?)
    }

    pub fn summary(&self) -> Summary {
        let scores = |b: &BranchOutcome| BranchScores {
            overall_accuracy: b.accuracy.overall_accuracy,
            kappa: b.accuracy.kappa,
            scene_overall_accuracy: b.scene_accuracy.overall_accuracy,
            scene_kappa: b.scene_accuracy.kappa,
        };
        let (before, after) = (scores(&self.before), scores(&self.after));
        Summary {
            seed: self.params.seed,
            params: self.params.clone(),
            retained_bands: self.selection.retained.clone(),
            training_pixels: self.train.len(),
            evaluation_pixels: self.eval.len(),
            delta_overall_accuracy: after.overall_accuracy - before.overall_accuracy,
            delta_kappa: self.delta_kappa(),
            delta_scene_overall_accuracy: after.scene_overall_accuracy
                - before.scene_overall_accuracy,
            delta_scene_kappa: after
                .scene_kappa
                .zip(before.scene_kappa)
                .map(|(a, b)| a - b),
            before,
            after,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchScores {
    pub overall_accuracy: f64,
    pub kappa: Option<f64>,
    pub scene_overall_accuracy: f64,
    pub scene_kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub params: PipelineParams,
    pub retained_bands: Vec<usize>,
    pub training_pixels: usize,
    pub evaluation_pixels: usize,
    pub before: BranchScores,
    pub after: BranchScores,
    pub delta_overall_accuracy: f64,
    pub delta_kappa: Option<f64>,
    pub delta_scene_overall_accuracy: f64,
    pub delta_scene_kappa: Option<f64>,
}

/// Confusion matrix as nested rows for JSON (unclassified row first).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionJson {
    pub class_ids: Vec<u32>,
    pub rows: Vec<Vec<u64>>,
}

impl From<&ConfusionMatrix> for ConfusionJson {
    fn from(cm: &ConfusionMatrix) -> Self {
        let c = cm.classes();
        Self {
            class_ids: cm.class_ids().to_vec(),
            rows: (0..=c)
                .map(|r| (0..c).map(|k| cm.cell(r, k)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationJson {
    pub confusion: ConfusionJson,
    pub accuracy: AccuracyReport,
}

impl EvaluationJson {
    pub fn new(cm: &ConfusionMatrix, accuracy: &AccuracyReport) -> Self {
        Self {
            confusion: cm.into(),
            accuracy: accuracy.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    pub seed: u64,
    pub branch: &'static str,
    pub bands: Vec<usize>,
    pub held_out: EvaluationJson,
    pub scene: EvaluationJson,
    pub area: AreaReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaJson {
    pub seed: Option<u64>,
    pub threshold: f64,
    pub pixel_count: usize,
    pub means: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// One row per component.
    pub eigenvectors: Vec<Vec<f64>>,
    pub variance_explained: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
    pub retained_bands: Vec<usize>,
    pub drops: Vec<specclass_core::pca::BandDrop>,
}

impl PcaJson {
    pub fn new(
        stats: &BandStatistics,
        pca: &PcaResult,
        selection: &BandSelection,
        threshold: f64,
        seed: Option<u64>,
    ) -> Self {
        let n = stats.bands();
        Self {
            seed,
            threshold,
            pixel_count: stats.pixel_count,
            means: stats.means.clone(),
            eigenvalues: pca.eigenvalues.clone(),
            eigenvectors: (0..n).map(|k| pca.eigenvectors.column(k)).collect(),
            variance_explained: pca.variance_explained.clone(),
            correlation: (0..n).map(|i| stats.correlation.row(i).to_vec()).collect(),
            retained_bands: selection.retained.clone(),
            drops: selection.drops.clone(),
        }
    }
}

fn branch(
    raster: &Raster,
    labels: &LabelMask,
    train: &TrainingSet,
    eval: &TrainingSet,
    params: &PipelineParams,
    stage: &'static str,
    par: Parallelism,
) -> Result<BranchOutcome> {
    let err = CliError::stage(stage);
    let models = fit_class_models(train, params.priors, params.regularization)
        .map_err(&err)?
        .with_threshold(params.threshold);
    let classmap = parallel::classify_raster(raster, &models, None, par)
        .and_then(|m| m.with_class_table(labels.class_table().clone()))
        .map_err(&err)?;
    let eval_mask = eval
        .to_mask(
            raster.width(),
            raster.height(),
            labels.class_table().clone(),
        )
        .map_err(&err)?;
    let confusion = confusion_matrix(&classmap, &eval_mask).map_err(&err)?;
    let accuracy = accuracy_report(&confusion).map_err(&err)?;
    let scene_confusion = confusion_matrix(&classmap, labels).map_err(&err)?;
    let scene_accuracy = accuracy_report(&scene_confusion).map_err(&err)?;
    let area = area_report(&classmap, raster.pixel_size()).map_err(&err)?;
    Ok(BranchOutcome {
        classmap,
        models,
        confusion,
        accuracy,
        scene_confusion,
        scene_accuracy,
        area,
    })
}

/// Runs both branches in memory.
pub fn run_on_data(
    image: &Raster,
    labels: &LabelMask,
    params: &PipelineParams,
    par: Parallelism,
) -> Result<PipelineOutcome> {
    let kernel = params.kernel().map_err(CliError::stage("transform"))?;
    let transformed = parallel::transform(image, &kernel, params.boundary, par)
        .map_err(CliError::stage("transform"))?;

    let select = CliError::stage("band selection");
    let statistics = band_statistics(&transformed, None).map_err(&select)?;
    let pca = principal_components(&statistics).map_err(&select)?;
    let selection = select_bands(&statistics, params.pca_threshold).map_err(&select)?;
    let original = image.select_bands(&selection.retained).map_err(&select)?;
    let smoothed = transformed
        .select_bands(&selection.retained)
        .map_err(&select)?;

    let sample = CliError::stage("sampling");
    let drawn =
        stratified_sample(labels, &original, params.per_class, params.seed).map_err(&sample)?;
    let (train, eval) =
        split_train_eval(&drawn, params.train_fraction, params.seed).map_err(&sample)?;
    let train_after = train.reextract(&smoothed).map_err(&sample)?;
    let eval_after = eval.reextract(&smoothed).map_err(&sample)?;

    let before = branch(
        &original,
        labels,
        &train,
        &eval,
        params,
        "classify original",
        par,
    )?;
    let after = branch(
        &smoothed,
        labels,
        &train_after,
        &eval_after,
        params,
        "classify transformed",
        par,
    )?;
    Ok(PipelineOutcome {
        params: params.clone(),
        transformed,
        statistics,
        pca,
        selection,
        train,
        eval,
        before,
        after,
    })
}

fn write_branch(
    dir: &Path,
    name: &'static str,
    outcome: &PipelineOutcome,
    b: &BranchOutcome,
) -> Result<()> {
    let dir = dir.join(name);
    let pixel_size = outcome.transformed.pixel_size();
    io::write_label_mask(&b.classmap, pixel_size, &dir.join("classmap"))?;
    io::write_bytes(
        &dir.join("confusion.csv"),
        &tables::confusion_csv(&b.confusion),
    )?;
    io::write_bytes(
        &dir.join("confusion_scene.csv"),
        &tables::confusion_csv(&b.scene_confusion),
    )?;
    io::write_json(
        &dir.join("model.json"),
        &ModelFile::from_models(&b.models, Some(outcome.selection.retained.clone())),
    )?;
    io::write_json(
        &dir.join("report.json"),
        &BranchReport {
            seed: outcome.params.seed,
            branch: name,
            bands: outcome.selection.retained.clone(),
            held_out: EvaluationJson::new(&b.confusion, &b.accuracy),
            scene: EvaluationJson::new(&b.scene_confusion, &b.scene_accuracy),
            area: b.area.clone(),
        },
    )
}

/// Writes every artifact of a finished run under `out_dir`.
pub fn write_outcome(outcome: &PipelineOutcome, out_dir: &Path) -> Result<()> {
    io::write_raster(&outcome.transformed, &out_dir.join("transformed"))?;
    io::write_json(
        &out_dir.join("pca.json"),
        &PcaJson::new(
            &outcome.statistics,
            &outcome.pca,
            &outcome.selection,
            outcome.params.pca_threshold,
            Some(outcome.params.seed),
        ),
    )?;
    tables::write_samples(&outcome.train, &out_dir.join("train.csv"))?;
    tables::write_samples(&outcome.eval, &out_dir.join("eval.csv"))?;
    write_branch(out_dir, "before", outcome, &outcome.before)?;
    write_branch(out_dir, "after", outcome, &outcome.after)?;
    io::write_json(&out_dir.join("summary.json"), &outcome.summary())
}

/// Reads the inputs, runs both branches and writes the report bundle.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    let image = io::read_raster(&config.image)?;
    let labels = io::read_label_mask(&config.labels)?;
    let outcome = run_on_data(&image, &labels, &config.params, config.parallelism)?;
    write_outcome(&outcome, &config.out_dir)?;
    Ok(outcome)
}
