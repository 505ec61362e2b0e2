use proptest::prelude::*;
use specclass_core::rng::SeededRng;
use specclass_core::weierstrass::{
    apply_transform, build_kernel_1d, build_kernel_2d, convolve_band, BoundaryMode, GaussianKernel,
    WEIERSTRASS_SIGMA,
};
use specclass_core::Raster;

/// Direct 2-D convolution with an explicitly evaluated Gaussian grid and
/// half-sample reflection, written independently of the library.
fn direct_gaussian(band: &[f64], w: usize, h: usize, sigma: f64, radius: i64) -> Vec<f64> {
    let mut grid = Vec::new();
    for j in -radius..=radius {
        for i in -radius..=radius {
            grid.push((-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = grid.iter().sum();
    grid.iter_mut().for_each(|g| *g /= sum);
    let reflect = |k: i64, n: i64| -> usize {
        let mut k = k;
        loop {
            if k < 0 {
                k = -k - 1;
            } else if k >= n {
                k = 2 * n - k - 1;
            } else {
                return k as usize;
            }
        }
    };
    let size = (2 * radius + 1) as usize;
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for j in -radius..=radius {
                for i in -radius..=radius {
                    let g = grid[(j + radius) as usize * size + (i + radius) as usize];
                    acc += g * band[reflect(y + j, h as i64) * w + reflect(x + i, w as i64)];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

fn random_band(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    (0..n).map(|_| rng.next_f64()).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn separable_matches_direct_oracle() {
    let band = random_band(16, 256);
    let k = build_kernel_1d(WEIERSTRASS_SIGMA, 3.0).unwrap();
    let sep = convolve_band(&band, 16, 16, &k, BoundaryMode::Reflect);
    let oracle = direct_gaussian(&band, 16, 16, WEIERSTRASS_SIGMA, 5);
    assert!(max_diff(&sep, &oracle) < 1e-10);
    // the library's own full-grid path agrees too
    let grid = build_kernel_2d(WEIERSTRASS_SIGMA, WEIERSTRASS_SIGMA, 0.0, 3.0).unwrap();
    let full = convolve_band(&band, 16, 16, &grid, BoundaryMode::Reflect);
    assert!(max_diff(&full, &oracle) < 1e-10);
}

#[test]
fn semigroup_on_interior_pixels() {
    let (w, h) = (64, 64);
    // Sampled Gaussians only compose exactly for content well below the
    // Nyquist frequency, so the random field is pre-smoothed first.
    let noise = random_band(3, w * h);
    let pre = build_kernel_1d(2.0, 8.0).unwrap();
    let band = convolve_band(&noise, w, h, &pre, BoundaryMode::Reflect);
    let r = Raster::from_bands(w, h, 1.0, vec![band]).unwrap();
    // wide truncation so that discarded tail mass stays far below the tolerance
    let unit = build_kernel_1d(1.0, 8.0).unwrap();
    let combined = build_kernel_1d(2f64.sqrt(), 8.0).unwrap();
    let twice = apply_transform(
        &apply_transform(&r, &unit, BoundaryMode::Reflect).unwrap(),
        &unit,
        BoundaryMode::Reflect,
    )
    .unwrap();
    let once = apply_transform(&r, &combined, BoundaryMode::Reflect).unwrap();
    let margin = 2 * unit.radius().max(combined.radius());
    let mut worst: f64 = 0.0;
    for y in margin..h - margin {
        for x in margin..w - margin {
            worst = worst.max((twice.get(0, y, x) - once.get(0, y, x)).abs());
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn transform_blurs_a_step_edge() {
    let (w, h) = (20, 4);
    let band: Vec<f64> = (0..w * h)
        .map(|i| if i % w < 10 { 0.0 } else { 100.0 })
        .collect();
    let r = Raster::from_bands(w, h, 1.0, vec![band]).unwrap();
    let out = apply_transform(&r, &GaussianKernel::weierstrass(), BoundaryMode::Reflect).unwrap();
    assert!(out.get(0, 2, 9) > 0.0 && out.get(0, 2, 9) < 50.0);
    assert!(out.get(0, 2, 10) > 50.0 && out.get(0, 2, 10) < 100.0);
}

fn kernel_strategy() -> impl Strategy<Value = GaussianKernel> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|s| build_kernel_1d(s, 3.0).unwrap()),
        (0.3f64..2.5, 0.3f64..2.5, -0.9f64..0.9)
            .prop_map(|(sx, sy, rho)| build_kernel_2d(sx, sy, rho, 3.0).unwrap()),
    ]
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shape_is_preserved(w in 1usize..12, h in 1usize..12, seed: u64, k in kernel_strategy(),
                          mode in prop_oneof![Just(BoundaryMode::Reflect), Just(BoundaryMode::Replicate), Just(BoundaryMode::Zero)]) {
        let r = Raster::from_bands(w, h, 1.0, vec![random_band(seed, w * h), random_band(seed ^ 1, w * h)]).unwrap();
        let out = apply_transform(&r, &k, mode).unwrap();
        prop_assert_eq!((out.width(), out.height(), out.bands()), (w, h, 2));
        prop_assert_eq!(out.data().len(), r.data().len());
    }

    #[test]
    fn output_stays_within_input_range(w in 2usize..14, h in 2usize..14, seed: u64, k in kernel_strategy(),
                                       mode in prop_oneof![Just(BoundaryMode::Reflect), Just(BoundaryMode::Replicate)]) {
        let band: Vec<f64> = random_band(seed, w * h).iter().map(|v| 50.0 * v - 10.0).collect();
        let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let out = convolve_band(&band, w, h, &k, mode);
        let tol = 1e-12 * hi.abs().max(lo.abs());
        prop_assert!(out.iter().all(|&v| v >= lo - tol && v <= hi + tol));
    }

    #[test]
    fn reflect_never_increases_variance(w in 2usize..16, h in 2usize..16, seed: u64, k in kernel_strategy()) {
        let band = random_band(seed, w * h);
        let out = convolve_band(&band, w, h, &k, BoundaryMode::Reflect);
        prop_assert!(variance(&out) <= variance(&band) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn weights_are_a_probability_grid(k in kernel_strategy()) {
        let g = k.to_grid();
        prop_assert!(g.iter().all(|&w| w >= 0.0));
        prop_assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
