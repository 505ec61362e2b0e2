//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::Value;
use specclass::parallel::Parallelism;
use specclass::pipeline::{run_on_data, write_outcome, PipelineParams};
use specclass_core::evaluation::{accuracy_report, percent_shares, ConfusionMatrix};
use specclass_core::linalg::SquareMatrix;
use specclass_core::mlc::{classify_pixel, fit_class_models, PriorsMode};
use specclass_core::pca::principal_components_of;
use specclass_core::rng::SeededRng;
use specclass_core::sampling::stratified_sample;
use specclass_core::scenegen::{generate_scene, SceneSpec};
use specclass_core::spectral_stats::band_moments;
use specclass_core::weierstrass::{
    apply_transform, build_kernel_1d, convolve_band, BoundaryMode, GaussianKernel,
    WEIERSTRASS_SIGMA,
};
use specclass_core::Raster;

// Tolerances, in the units the criteria state them.
const OA_TABLE1_TOL_PP: f64 = 0.005;
const OA_TABLE2_TOL_PP: f64 = 0.0005;
const AREA_PERCENT_TOL_PP: f64 = 0.01;
const TREND_MIN_DELTA_PP: f64 = 2.0;
const TREND_MAX_SECONDS: f64 = 60.0;
const REGRESSION_TOL: f64 = 1e-12;
const POSTERIOR_TOL: f64 = 1e-9;
const SEPARABLE_TOL: f64 = 1e-10;
const SEMIGROUP_TOL: f64 = 1e-6;
const EIGEN_TRACE_TOL: f64 = 1e-9;
const ORTHONORMAL_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;
const KAPPA_TOL: f64 = 1e-12;

const SCENE: &str = include_str!("../fixtures/acceptance_scene.json");
const EXPECTED: &str = include_str!("../fixtures/acceptance_expected.json");

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, criterion: &str, pass: bool, detail: String) {
        println!(
            "{} criterion {criterion}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failures += 1;
        }
    }

    fn info(&self, criterion: &str, detail: String) {
        println!("INFO criterion {criterion}: {detail}");
    }
}

/// Confusion matrix with the given diagonal and off-diagonal mass spread
/// over the unclassified row and the first off-diagonal cells.
fn matrix_with(diagonal: &[u64], off: u64) -> ConfusionMatrix {
    let c = diagonal.len();
    let mut counts = vec![0u64; (c + 1) * c];
    for (k, &d) in diagonal.iter().enumerate() {
        counts[(k + 1) * c + k] = d;
    }
    let unclassified = off / 3;
    counts[0] = unclassified;
    let rest = off - unclassified;
    for i in 0..rest as usize {
        let k = i % c;
        let row = (k + 1) % c + 1;
        counts[row * c + k] += 1;
    }
    ConfusionMatrix::from_counts((1..=c as u32).collect(), counts).unwrap()
}

fn criterion_1(g: &mut Gate) {
    let t1 = matrix_with(&[3100, 4200, 5000, 3900, 2118], 21_394 - 18_318);
    let t2 = matrix_with(&[3400, 4600, 5500, 4300, 2356], 21_394 - 20_156);
    let r1 = accuracy_report(&t1).unwrap();
    let r2 = accuracy_report(&t2).unwrap();
    let (oa1, oa2) = (100.0 * r1.overall_accuracy, 100.0 * r2.overall_accuracy);
    g.check(
        "1a",
        r1.total == 21_394 && r1.correct == 18_318 && (oa1 - 85.6222).abs() <= OA_TABLE1_TOL_PP,
        format!(
            "OA {}/{} = {oa1:.6}% (target 85.6222 ± {OA_TABLE1_TOL_PP} pp)",
            r1.correct, r1.total
        ),
    );
    g.check(
        "1b",
        r2.total == 21_394 && r2.correct == 20_156 && (oa2 - 94.2133).abs() <= OA_TABLE2_TOL_PP,
        format!(
            "OA {}/{} = {oa2:.6}% (target 94.2133 ± {OA_TABLE2_TOL_PP} pp)",
            r2.correct, r2.total
        ),
    );
}

fn criterion_2(g: &mut Gate) {
    let tables: [(&str, [f64; 6], [f64; 6]); 2] = [
        (
            "2",
            [
                26_783.64, 59_095.08, 56_719.08, 130_868.28, 126_133.92, 16_532.64,
            ],
            [6.44, 14.20, 13.63, 31.45, 30.31, 3.97],
        ),
        (
            "2 (second map, extra)",
            [
                42_851.16, 57_232.08, 43_005.24, 186_373.08, 80_677.44, 5_993.64,
            ],
            [10.30, 13.75, 10.34, 44.79, 19.39, 1.44],
        ),
    ];
    for (label, areas, published) in tables {
        let total: f64 = areas.iter().sum();
        let shares = percent_shares(&areas);
        let worst = shares
            .iter()
            .zip(published)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        g.check(
            label,
            worst <= AREA_PERCENT_TOL_PP && (total - 416_132.64).abs() < 1e-6,
            format!(
                "six classes over {total:.2} m², largest |recomputed − published| = {worst:.5} pp (≤ {AREA_PERCENT_TOL_PP})"
            ),
        );
    }
}

fn criterion_3_and_8(g: &mut Gate) {
    let spec: SceneSpec = serde_json::from_str(SCENE).unwrap();
    let expected: Value = serde_json::from_str(EXPECTED).unwrap();
    let params = PipelineParams::default();

    let start = Instant::now();
    let (image, truth) = generate_scene(&spec).unwrap();
    let outcome = run_on_data(&image, &truth, &params, Parallelism::threads(1)).unwrap();
    let seconds = start.elapsed().as_secs_f64();

    let s = outcome.summary();
    let delta_pp = 100.0 * s.delta_overall_accuracy;
    let (kb, ka) = (
        s.before.kappa.unwrap_or(f64::NAN),
        s.after.kappa.unwrap_or(f64::NAN),
    );
    g.check(
        "3a",
        delta_pp >= TREND_MIN_DELTA_PP,
        format!(
            "held-out OA {:.4}% -> {:.4}% (ΔOA = {delta_pp:+.4} pp, need ≥ +{TREND_MIN_DELTA_PP})",
            100.0 * s.before.overall_accuracy,
            100.0 * s.after.overall_accuracy
        ),
    );
    g.check("3b", ka > kb, format!("kappa {kb:.6} -> {ka:.6}"));
    g.check(
        "3c",
        seconds <= TREND_MAX_SECONDS,
        format!("scene generation + both branches single-threaded in {seconds:.2} s (≤ {TREND_MAX_SECONDS})"),
    );
    g.info(
        "3",
        format!(
            "full-scene OA {:.4}% -> {:.4}%, retained bands {:?}",
            100.0 * s.before.scene_overall_accuracy,
            100.0 * s.after.scene_overall_accuracy,
            s.retained_bands
        ),
    );
    let measured: BTreeMap<&str, f64> = [
        ("before_overall_accuracy", s.before.overall_accuracy),
        ("after_overall_accuracy", s.after.overall_accuracy),
        ("before_kappa", kb),
        ("after_kappa", ka),
        (
            "before_scene_overall_accuracy",
            s.before.scene_overall_accuracy,
        ),
        (
            "after_scene_overall_accuracy",
            s.after.scene_overall_accuracy,
        ),
    ]
    .into_iter()
    .collect();
    let mut mismatches = Vec::new();
    for (key, value) in &measured {
        match expected.get(*key).and_then(Value::as_f64) {
            Some(e) if (e - value).abs() <= REGRESSION_TOL => {}
            other => mismatches.push(format!("{key}: expected {other:?}, got {value:?}")),
        }
    }
    let retained: Vec<usize> = expected["retained_bands"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(Value::as_u64)
                .map(|v| v as usize)
                .collect()
        })
        .unwrap_or_default();
    if retained != s.retained_bands {
        mismatches.push(format!(
            "retained_bands: expected {retained:?}, got {:?}",
            s.retained_bands
        ));
    }
    g.check(
        "3d",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("regression lock matches fixtures/acceptance_expected.json within {REGRESSION_TOL:e}")
        } else {
            format!("regression lock differs: {}", mismatches.join("; "))
        },
    );

    // Determinism: two runs and two thread counts give byte-identical bundles.
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    write_outcome(&outcome, dirs[0].path()).unwrap();
    let again = run_on_data(&image, &truth, &params, Parallelism::threads(1)).unwrap();
    write_outcome(&again, dirs[1].path()).unwrap();
    let wide = run_on_data(&image, &truth, &params, Parallelism::threads(4)).unwrap();
    write_outcome(&wide, dirs[2].path()).unwrap();
    let a = snapshot(dirs[0].path());
    let json_files = a.keys().filter(|k| k.ends_with(".json")).count();
    g.check(
        "8a",
        a == snapshot(dirs[1].path()),
        format!(
            "two runs, same config: {} files ({json_files} JSON reports) byte-identical",
            a.len()
        ),
    );
    g.check(
        "8b",
        a == snapshot(dirs[2].path()),
        "1 thread vs 4 threads: every output byte-identical".into(),
    );
    let samples: Vec<_> = [1usize, 2, 8]
        .iter()
        .map(|&t| {
            Parallelism::threads(t).install(|| stratified_sample(&truth, &image, 500, 42).unwrap())
        })
        .collect();
    let mut drawn: Vec<(usize, usize)> =
        samples[0].entries.iter().map(|e| (e.row, e.col)).collect();
    let mut used: Vec<(usize, usize)> = outcome
        .train
        .entries
        .iter()
        .chain(&outcome.eval.entries)
        .map(|e| (e.row, e.col))
        .collect();
    drawn.sort_unstable();
    used.sort_unstable();
    g.check(
        "8c",
        samples.windows(2).all(|w| w[0] == w[1]) && drawn == used,
        format!(
            "stratified_sample identical under 1, 2 and 8 worker threads ({} pixels, same coordinates the pipeline used)",
            drawn.len()
        ),
    );
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Determinant and inverse by Gauss–Jordan elimination with partial pivoting.
fn gauss_jordan(a: &SquareMatrix) -> (f64, Vec<Vec<f64>>) {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())
            .unwrap();
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                for c in 0..2 * n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (det, m.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn criterion_4(g: &mut Gate) {
    let spec: SceneSpec = serde_json::from_str(SCENE).unwrap();
    let (image, truth) = generate_scene(&spec).unwrap();
    // three classes, two bands: keeps densities far from underflow
    let keep: Vec<u32> = vec![2, 3, 5];
    let set = stratified_sample(&truth, &image.select_bands(&[1, 3]).unwrap(), 200, 3).unwrap();
    let mut three = set.clone();
    three.entries.retain(|e| keep.contains(&e.class_id));
    let models = fit_class_models(&three, PriorsMode::Proportional, 1e-6).unwrap();
    // (class id, prior, mean, |Σ|, Σ⁻¹)
    type Density = (u32, f64, Vec<f64>, f64, Vec<Vec<f64>>);
    let dens: Vec<Density> = models
        .models()
        .iter()
        .map(|m| {
            let (det, inv) = gauss_jordan(m.covariance());
            (m.class_id(), m.prior(), m.mean().to_vec(), det, inv)
        })
        .collect();
    let mut rng = SeededRng::new(99);
    let (mut decisions, mut worst) = (0usize, 0.0f64);
    for _ in 0..1000 {
        let x = [55.0 + 40.0 * rng.next_f64(), 60.0 + 90.0 * rng.next_f64()];
        let weighted: Vec<f64> = dens
            .iter()
            .map(|(_, prior, mean, det, inv)| {
                let d = [x[0] - mean[0], x[1] - mean[1]];
                let mut q = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        q += d[i] * inv[i][j] * d[j];
                    }
                }
                prior * (-0.5 * q).exp() / ((2.0 * std::f64::consts::PI).powi(2) * det).sqrt()
            })
            .collect();
        let total: f64 = weighted.iter().sum();
        let mut best = 0;
        for k in 1..weighted.len() {
            if weighted[k] > weighted[best] {
                best = k;
            }
        }
        let scores = classify_pixel(&models, &x).unwrap();
        if scores.decision == dens[best].0 {
            decisions += 1;
        }
        for (p, w) in scores.posteriors.iter().zip(&weighted) {
            worst = worst.max((p - w / total).abs());
        }
    }
    g.check(
        "4",
        decisions == 1000 && worst < POSTERIOR_TOL,
        format!("{decisions}/1000 decisions match the density×prior oracle, max posterior diff {worst:.2e} (< {POSTERIOR_TOL:e})"),
    );
}

fn direct_convolution(band: &[f64], w: usize, h: usize, sigma: f64, radius: i64) -> Vec<f64> {
    let mut grid = Vec::new();
    for j in -radius..=radius {
        for i in -radius..=radius {
            grid.push((-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = grid.iter().sum();
    let reflect = |k: i64, n: i64| -> usize {
        let k = k.rem_euclid(2 * n);
        (if k < n { k } else { 2 * n - 1 - k }) as usize
    };
    let size = (2 * radius + 1) as usize;
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for j in -radius..=radius {
                for i in -radius..=radius {
                    let g = grid[(j + radius) as usize * size + (i + radius) as usize] / sum;
                    acc += g * band[reflect(y + j, h as i64) * w + reflect(x + i, w as i64)];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

fn semigroup_gap(band: Vec<f64>, w: usize, h: usize) -> f64 {
    let r = Raster::from_bands(w, h, 1.0, vec![band]).unwrap();
    let unit = build_kernel_1d(1.0, 8.0).unwrap();
    let combined = build_kernel_1d(2f64.sqrt(), 8.0).unwrap();
    let twice = apply_transform(
        &apply_transform(&r, &unit, BoundaryMode::Reflect).unwrap(),
        &unit,
        BoundaryMode::Reflect,
    )
    .unwrap();
    let once = apply_transform(&r, &combined, BoundaryMode::Reflect).unwrap();
    let margin = 2 * combined.radius();
    let mut worst = 0.0f64;
    for y in margin..h - margin {
        for x in margin..w - margin {
            worst = worst.max((twice.get(0, y, x) - once.get(0, y, x)).abs());
        }
    }
    worst
}

fn criterion_5(g: &mut Gate) {
    let mut rng = SeededRng::new(5);
    let band: Vec<f64> = (0..256).map(|_| rng.next_f64()).collect();
    let kernel = GaussianKernel::weierstrass();
    let separable = convolve_band(&band, 16, 16, &kernel, BoundaryMode::Reflect);
    let direct = direct_convolution(&band, 16, 16, WEIERSTRASS_SIGMA, kernel.radius() as i64);
    let diff = separable
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    g.check(
        "5a",
        diff < SEPARABLE_TOL,
        format!("16×16 separable vs direct 2-D, σ=√2, reflect: max |diff| = {diff:.2e} (< {SEPARABLE_TOL:e})"),
    );

    let (w, h) = (64, 64);
    let noise: Vec<f64> = (0..w * h).map(|_| rng.next_f64()).collect();
    let smooth = convolve_band(
        &noise,
        w,
        h,
        &build_kernel_1d(2.0, 8.0).unwrap(),
        BoundaryMode::Reflect,
    );
    let gap = semigroup_gap(smooth, w, h);
    g.check(
        "5b",
        gap < SEMIGROUP_TOL,
        format!("σ=1 twice vs σ=√2 on interior pixels (band-limited field, kernels truncated at 8σ): {gap:.2e} (< {SEMIGROUP_TOL:e})"),
    );
    g.info(
        "5",
        format!(
            "same comparison on raw white noise: {:.2e} (sampled-kernel aliasing near Nyquist)",
            semigroup_gap(noise, w, h)
        ),
    );
}

fn criterion_6(g: &mut Gate) {
    let mut rng = SeededRng::new(6);
    let n = 4;
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let mut b = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = 2.0 * rng.next_f64() - 1.0;
            }
        }
        let mut a = b.mul(&b.transpose());
        for i in 0..n {
            a[(i, i)] += 0.05;
        }
        let pca = principal_components_of(&a).unwrap();
        let v = &pca.eigenvectors;
        worst[0] = worst[0].max((pca.eigenvalues.iter().sum::<f64>() - a.trace()).abs());
        worst[1] = worst[1].max(
            v.transpose()
                .mul(v)
                .max_abs_diff(&SquareMatrix::identity(n)),
        );
        let recon = v
            .mul(&SquareMatrix::from_diagonal(&pca.eigenvalues))
            .mul(&v.transpose());
        worst[2] = worst[2].max(recon.max_abs_diff(&a));
        for k in 0..n {
            let col = v.column(k);
            let av = a.mul_vec(&col);
            let r: f64 = av
                .iter()
                .zip(&col)
                .map(|(x, c)| (x - pca.eigenvalues[k] * c).powi(2))
                .sum::<f64>()
                .sqrt();
            worst[3] = worst[3].max(r);
        }
    }
    g.check(
        "6",
        worst[0] < EIGEN_TRACE_TOL
            && worst[1] < ORTHONORMAL_TOL
            && worst[2] < RECONSTRUCTION_TOL
            && worst[3] < RESIDUAL_TOL,
        format!(
            "100 SPD 4×4: |Σλ − tr| {:.1e}, |VᵀV − I| {:.1e}, |VΛVᵀ − A| {:.1e}, max ‖Av − λv‖ {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
}

fn criterion_7(g: &mut Gate) {
    let kappa = |ids: Vec<u32>, m: &[u64]| {
        accuracy_report(&ConfusionMatrix::from_square(ids, m).unwrap())
            .unwrap()
            .kappa
    };
    let k1 = kappa(vec![1, 2], &[30, 10, 20, 40]).unwrap();
    let k2 = kappa(vec![1, 2, 3], &[12, 0, 0, 0, 7, 0, 0, 0, 30]).unwrap();
    // rows (0.4, 0.6) ⊗ columns (0.3, 0.7), scaled to 100 pixels
    let k3 = kappa(vec![1, 2], &[12, 28, 18, 42]).unwrap();
    g.check(
        "7a",
        (k1 - 0.4).abs() < KAPPA_TOL,
        format!("[[30,10],[20,40]] → κ = {k1:.15}"),
    );
    g.check("7b", k2 == 1.0, format!("perfect diagonal → κ = {k2}"));
    g.check(
        "7c",
        k3.abs() < KAPPA_TOL,
        format!("independence fixture → κ = {k3:.2e}"),
    );
}

fn criterion_9(g: &mut Gate) {
    let mut rng = SeededRng::new(9);
    let values: Vec<f64> = (0..10_000).map(|_| rng.lognormal(0.0, 0.8)).collect();
    let r = Raster::from_bands(100, 100, 1.0, vec![values]).unwrap();
    let before = band_moments(&r, 0).unwrap().skewness.unwrap();
    let smoothed =
        apply_transform(&r, &GaussianKernel::weierstrass(), BoundaryMode::Reflect).unwrap();
    let after = band_moments(&smoothed, 0).unwrap().skewness.unwrap();
    g.check(
        "9",
        before > 1.0 && after < before,
        format!("lognormal σ_log=0.8, 10⁴ px: skewness {before:.4} -> {after:.4} after σ=√2"),
    );
}

fn main() {
    let mut g = Gate { failures: 0 };
    criterion_1(&mut g);
    criterion_2(&mut g);
    criterion_3_and_8(&mut g);
    criterion_4(&mut g);
    criterion_5(&mut g);
    criterion_6(&mut g);
    criterion_7(&mut g);
    criterion_9(&mut g);
    if g.failures > 0 {
        println!("acceptance: {} criterion check(s) failed", g.failures);
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
