//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use specclass_core::evaluation::{accuracy_report, area_report, confusion_matrix};
use specclass_core::mlc::{fit_class_models, PriorsMode, DEFAULT_REGULARIZATION};
use specclass_core::pca::{
    band_statistics, principal_components, select_bands, DEFAULT_REDUNDANCY_THRESHOLD,
};
use specclass_core::sampling::{split_train_eval, stratified_sample};
use specclass_core::scenegen::{generate_scene, SceneSpec};
use specclass_core::spectral_stats::{band_histogram, band_moments_with, NormalityThresholds};
use specclass_core::weierstrass::{BoundaryMode, DEFAULT_TRUNCATION, WEIERSTRASS_SIGMA};

use crate::error::{CliError, Result};
use crate::io;
use crate::model::ModelFile;
use crate::parallel::{self, Parallelism};
use crate::pipeline::{self, EvaluationJson, PcaJson, PipelineConfig, PipelineParams};
use crate::tables;

#[derive(Debug, Parser)]
#[command(
    name = "specclass",
    version,
    about = "Gaussian smoothing and maximum-likelihood land-cover classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic scene and its truth mask from a JSON scene spec.
    Synth(SynthArgs),
    /// Equal-width histogram of each band.
    Histogram(HistogramArgs),
    /// Mean, variance, skewness, excess kurtosis and a normality verdict per band.
    Moments(MomentsArgs),
    /// Gaussian (Weierstrass) smoothing of every band.
    Transform(TransformArgs),
    /// Band covariance, principal components and redundant-band screening.
    Pca(PcaArgs),
    /// Stratified random training pixels, split into train and evaluation CSVs.
    Sample(SampleArgs),
    /// Fit per-class Gaussian models from a training CSV.
    Train(TrainArgs),
    /// Maximum-likelihood classification of an image.
    Classify(ClassifyArgs),
    /// Confusion matrix, accuracy, kappa and areas of a class map against truth.
    Evaluate(EvaluateArgs),
    /// Classify before and after smoothing and compare.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene spec (JSON).
    pub spec: PathBuf,
    /// Output prefix; writes `<prefix>.*` and `<prefix>_truth.*`.
    pub out_prefix: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    pub image: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Only this band (default: all).
    #[arg(long)]
    pub band: Option<usize>,
    /// Also write `band<N>.csv` files (bin_lo, bin_hi, count) here.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    pub image: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub skewness_threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kurtosis_threshold: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, default_value_t = WEIERSTRASS_SIGMA)]
    pub sigma: f64,
    /// Vertical σ for an anisotropic kernel.
    #[arg(long)]
    pub sigma_y: Option<f64>,
    /// Correlation between the kernel axes.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho: f64,
    /// Kernel radius in σ units.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    pub truncation: f64,
    /// reflect, replicate or zero.
    #[arg(long, default_value = "reflect")]
    pub boundary: BoundaryMode,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    pub image: PathBuf,
    pub out: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    pub image: PathBuf,
    #[arg(long, default_value_t = DEFAULT_REDUNDANCY_THRESHOLD)]
    pub threshold: f64,
    /// Restrict statistics to labeled pixels of this mask.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub labels: PathBuf,
    pub image: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub per_class: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Comma-separated band subset (default: all).
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<usize>>,
    /// Directory for `train.csv` and `eval.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV (row, col, class_id, b0…).
    pub samples: PathBuf,
    /// uniform or proportional.
    #[arg(long, default_value = "uniform")]
    pub priors: PriorsMode,
    #[arg(long, default_value_t = DEFAULT_REGULARIZATION)]
    pub regularization: f64,
    /// Minimum log-discriminant for assignment; lower scores stay unclassified.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Raster bands the sample features came from (recorded in the model).
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<usize>>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub image: PathBuf,
    pub model: PathBuf,
    /// Output prefix for the class map.
    pub out: PathBuf,
    /// Band subset (default: the model's recorded bands, else all).
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<usize>>,
    /// Overrides the model's threshold.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Class table to attach to the map.
    #[arg(long)]
    pub classes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub predicted: PathBuf,
    pub truth: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the confusion matrix as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    pub image: PathBuf,
    pub labels: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = DEFAULT_REDUNDANCY_THRESHOLD)]
    pub pca_threshold: f64,
    #[arg(long, default_value_t = 500)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value = "uniform")]
    pub priors: PriorsMode,
    #[arg(long, default_value_t = DEFAULT_REGULARIZATION)]
    pub regularization: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => io::write_json(path, value),
        None => {
            print!("{}", io::to_json_string(value));
            Ok(())
        }
    }
}

fn truth_prefix(prefix: &Path) -> PathBuf {
    let mut s = io::dataset_stem(prefix).into_os_string();
    s.push("_truth");
    PathBuf::from(s)
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mut spec: SceneSpec = io::read_json(&a.spec)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let (raster, mask) = generate_scene(&spec).map_err(CliError::stage("synth"))?;
    io::write_raster(&raster, &a.out_prefix)?;
    io::write_label_mask(&mask, raster.pixel_size(), &truth_prefix(&a.out_prefix))
}

fn histogram(a: &HistogramArgs) -> Result<()> {
    let raster = io::read_raster(&a.image)?;
    let bands: Vec<usize> = match a.band {
        Some(b) => vec![b],
        None => (0..raster.bands()).collect(),
    };
    let mut out = Vec::new();
    for b in bands {
        let h = band_histogram(&raster, b, a.bins).map_err(CliError::stage("histogram"))?;
        if let Some(dir) = &a.csv_dir {
            io::write_bytes(
                &dir.join(format!("band{b}.csv")),
                &tables::histogram_csv(&h),
            )?;
        }
        out.push(h);
    }
    emit(&out, a.out.as_deref())
}

fn moments(a: &MomentsArgs) -> Result<()> {
    let raster = io::read_raster(&a.image)?;
    let thresholds = NormalityThresholds {
        skewness: a.skewness_threshold,
        excess_kurtosis: a.kurtosis_threshold,
    };
    let reports = (0..raster.bands())
        .map(|b| band_moments_with(&raster, b, &thresholds))
        .collect::<specclass_core::Result<Vec<_>>>()
        .map_err(CliError::stage("moments"))?;
    emit(&reports, a.out.as_deref())
}

fn kernel_params(k: &KernelArgs) -> PipelineParams {
    PipelineParams {
        sigma: k.sigma,
        sigma_y: k.sigma_y,
        rho: k.rho,
        truncation: k.truncation,
        boundary: k.boundary,
        ..PipelineParams::default()
    }
}

fn transform(a: &TransformArgs) -> Result<()> {
    let raster = io::read_raster(&a.image)?;
    let kernel = kernel_params(&a.kernel)
        .kernel()
        .map_err(CliError::stage("transform"))?;
    let out = parallel::transform(&raster, &kernel, a.kernel.boundary, Parallelism::from_env())
        .map_err(CliError::stage("transform"))?;
    io::write_raster(&out, &a.out)
}

fn pca(a: &PcaArgs) -> Result<()> {
    let raster = io::read_raster(&a.image)?;
    let labels = a.labels.as_deref().map(io::read_label_mask).transpose()?;
    let err = CliError::stage("pca");
    let stats = band_statistics(&raster, labels.as_ref()).map_err(&err)?;
    let result = principal_components(&stats).map_err(&err)?;
    let selection = select_bands(&stats, a.threshold).map_err(&err)?;
    emit(
        &PcaJson::new(&stats, &result, &selection, a.threshold, None),
        a.out.as_deref(),
    )
}

fn sample(a: &SampleArgs) -> Result<()> {
    let labels = io::read_label_mask(&a.labels)?;
    let mut raster = io::read_raster(&a.image)?;
    let err = CliError::stage("sample");
    if let Some(bands) = &a.bands {
        raster = raster.select_bands(bands).map_err(&err)?;
    }
    let drawn = stratified_sample(&labels, &raster, a.per_class, a.seed).map_err(&err)?;
    let (train, eval) = split_train_eval(&drawn, a.train_fraction, a.seed).map_err(&err)?;
    tables::write_samples(&train, &a.out_dir.join("train.csv"))?;
    tables::write_samples(&eval, &a.out_dir.join("eval.csv"))
}

fn train(a: &TrainArgs) -> Result<()> {
    let set = tables::read_samples(&a.samples, 0)?;
    let models = fit_class_models(&set, a.priors, a.regularization)
        .map_err(CliError::stage("train"))?
        .with_threshold(a.threshold);
    io::write_json(&a.out, &ModelFile::from_models(&models, a.bands.clone()))
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let raster = io::read_raster(&a.image)?;
    let file: ModelFile = io::read_json(&a.model)?;
    let err = CliError::stage("classify");
    let mut models = file.to_models().map_err(&err)?;
    if a.threshold.is_some() {
        models = models.with_threshold(a.threshold);
    }
    let bands = a.bands.clone().or(file.bands);
    let mut map =
        parallel::classify_raster(&raster, &models, bands.as_deref(), Parallelism::from_env())
            .map_err(&err)?;
    if let Some(path) = &a.classes {
        let table = io::read_json(path)?;
        map = map.with_class_table(table).map_err(&err)?;
    }
    io::write_label_mask(&map, raster.pixel_size(), &a.out)
}

#[derive(Debug, Serialize)]
struct EvaluateReport {
    #[serde(flatten)]
    evaluation: EvaluationJson,
    area: specclass_core::evaluation::AreaReport,
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let predicted = io::read_label_mask(&a.predicted)?;
    let truth = io::read_label_mask(&a.truth)?;
    let pixel_size = io::read_header(&a.predicted)?.pixel_size_m;
    let err = CliError::stage("evaluate");
    let cm = confusion_matrix(&predicted, &truth).map_err(&err)?;
    let accuracy = accuracy_report(&cm).map_err(&err)?;
    let area = area_report(&predicted, pixel_size).map_err(&err)?;
    if let Some(path) = &a.csv {
        io::write_bytes(path, &tables::confusion_csv(&cm))?;
    }
    eprintln!("{}", accuracy_line(&accuracy));
    emit(
        &EvaluateReport {
            evaluation: EvaluationJson::new(&cm, &accuracy),
            area,
        },
        a.out.as_deref(),
    )
}

fn accuracy_line(r: &specclass_core::evaluation::AccuracyReport) -> String {
    let kappa = r
        .kappa
        .map_or_else(|| String::from("undefined"), |k| format!("{k:.4}"));
    format!(
        "overall accuracy ({}/{}) = {:.2}%, kappa = {kappa}",
        r.correct,
        r.total,
        100.0 * r.overall_accuracy
    )
}

fn run_pipeline(a: &PipelineArgs) -> Result<()> {
    let params = PipelineParams {
        pca_threshold: a.pca_threshold,
        per_class: a.per_class,
        train_fraction: a.train_fraction,
        priors: a.priors,
        regularization: a.regularization,
        threshold: a.threshold,
        seed: a.seed,
        ..kernel_params(&a.kernel)
    };
    let config = PipelineConfig {
        image: a.image.clone(),
        labels: a.labels.clone(),
        out_dir: a.out_dir.clone(),
        params,
        parallelism: Parallelism::from_env(),
    };
    let outcome = pipeline::run_pipeline(&config)?;
    eprintln!("before: {}", accuracy_line(&outcome.before.accuracy));
    eprintln!("after:  {}", accuracy_line(&outcome.after.accuracy));
    Ok(())
}

impl Cli {
    pub fn run(&self) -> Result<()> {
        match &self.command {
            Command::Synth(a) => synth(a),
            Command::Histogram(a) => histogram(a),
            Command::Moments(a) => moments(a),
            Command::Transform(a) => transform(a),
            Command::Pca(a) => pca(a),
            Command::Sample(a) => sample(a),
            Command::Train(a) => train(a),
            Command::Classify(a) => classify(a),
            Command::Evaluate(a) => evaluate(a),
            Command::Pipeline(a) => run_pipeline(a),
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
