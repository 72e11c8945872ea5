//! Statistical behavior of the Monte Carlo oracle: sampler moments,
//! 1/√n error scaling, seed-robust 4σ coverage, and convergence of the
//! estimated g¹ to the closed-form value.

use ghostbeam::diffraction::{kernel_nslit, NSlit};
use ghostbeam::optics::analytic_moments;
use ghostbeam::oracle::{
    estimate_cross_correlation, estimate_cross_correlations, sample_thermal_field, IDLER_SIGN,
};
use ghostbeam::{BeamSplitter, ModeGrid, SourceSpectrum};
use num_complex::Complex64;

fn double_slit_bench(count: usize) -> (SourceSpectrum, BeamSplitter, ghostbeam::DiffractionKernel) {
    let grid = ModeGrid::new(1.5e6, count, 500e-9).unwrap();
    let spectrum = SourceSpectrum::gaussian(&grid, 2.0, 8e5).unwrap();
    let bs = BeamSplitter::new(0.6).unwrap();
    let kernel = kernel_nslit(&grid, &NSlit::new(2, 10e-6, 50e-6).unwrap(), 0.02).unwrap();
    (spectrum, bs, kernel)
}

#[test]
fn sampler_reproduces_occupation_and_circularity() {
    let grid = ModeGrid::new(1e5, 5, 500e-9).unwrap();
    let occupation = vec![0.0, 0.5, 2.0, 3.5, 0.0];
    let spectrum = SourceSpectrum::from_values(&grid, occupation.clone()).unwrap();
    let n_draws = 1_000_000u64;
    let mut sum_sqr = [0.0f64; 5];
    let mut sum_quad = [Complex64::ZERO; 5];
    for seed in 0..n_draws {
        let sample = sample_thermal_field(&spectrum, seed);
        for (k, a) in sample.amplitudes().iter().enumerate() {
            sum_sqr[k] += a.norm_sqr();
            sum_quad[k] += a * a;
        }
    }
    for k in 0..5 {
        let mean_sqr = sum_sqr[k] / n_draws as f64;
        // |α|² is exponential with mean and std both ⟨N⟩
        let se = occupation[k] / (n_draws as f64).sqrt();
        assert!(
            (mean_sqr - occupation[k]).abs() <= 4.0 * se,
            "mode {k}: ⟨|α|²⟩ = {mean_sqr}, want {} ± {}",
            occupation[k],
            4.0 * se
        );
        // E[α²] = 0 (circular symmetry); Var(α²) = 2⟨N⟩² per quadrature pair
        let mean_quad = sum_quad[k] / n_draws as f64;
        let se_quad = occupation[k] * (2.0 / n_draws as f64).sqrt();
        assert!(
            mean_quad.norm() <= 4.0 * se_quad + 1e-12,
            "mode {k}: ⟨α²⟩ = {mean_quad}, expected 0 ± {se_quad}"
        );
    }
}

#[test]
fn std_error_scales_as_inverse_sqrt_n() {
    let (spectrum, bs, kernel) = double_slit_bench(65);
    let base =
        estimate_cross_correlation(&spectrum, &bs, &kernel, 0.0, 0.0, 40_000, 9).unwrap();
    let wide =
        estimate_cross_correlation(&spectrum, &bs, &kernel, 0.0, 0.0, 640_000, 9).unwrap();
    let ratio = base.std_error / wide.std_error;
    // 16× the samples → 4× smaller standard error
    assert!((3.8..4.2).contains(&ratio), "SE ratio {ratio}, expected ≈ 4");
}

#[test]
fn four_sigma_coverage_over_seeds() {
    let (spectrum, bs, kernel) = double_slit_bench(129);
    let analytic = analytic_moments(&bs, &spectrum, &kernel).unwrap();
    let grid = spectrum.grid();
    let probe = grid.center() + 7;
    let reference = analytic.cd(probe, grid.center());
    let mut hits = 0;
    for seed in 0..20 {
        let est = estimate_cross_correlation(
            &spectrum,
            &bs,
            &kernel,
            grid.kx(probe),
            0.0,
            20_000,
            seed,
        )
        .unwrap();
        if (IDLER_SIGN * est.mean - reference).norm() <= 4.0 * est.std_error {
            hits += 1;
        }
    }
    assert!(hits >= 19, "4σ interval covered the closed form only {hits}/20 times");
}

#[test]
fn estimator_is_linear_in_occupation() {
    let (spectrum, bs, kernel) = double_slit_bench(65);
    let grid = spectrum.grid().clone();
    let halved = SourceSpectrum::from_values(
        &grid,
        spectrum.mean_photons().iter().map(|n| n / 2.0).collect(),
    )
    .unwrap();
    let full =
        estimate_cross_correlation(&spectrum, &bs, &kernel, 0.0, 0.0, 200_000, 21).unwrap();
    let half =
        estimate_cross_correlation(&halved, &bs, &kernel, 0.0, 0.0, 200_000, 22).unwrap();
    let gap = (full.mean / 2.0 - half.mean).norm();
    let combined_se = (full.std_error / 2.0).hypot(half.std_error);
    assert!(gap <= 4.0 * combined_se, "halving ⟨N⟩ missed halving the mean: {gap}");
}

#[test]
fn batch_estimates_agree_with_analytic() {
    let (spectrum, bs, kernel) = double_slit_bench(129);
    let analytic = analytic_moments(&bs, &spectrum, &kernel).unwrap();
    let grid = spectrum.grid();
    let probes: Vec<f64> = (0..8).map(|q| grid.kx(grid.center() - 28 + q * 8)).collect();
    let estimates =
        estimate_cross_correlations(&spectrum, &bs, &kernel, &probes, 0.0, 100_000, 5).unwrap();
    for (kx, est) in probes.iter().zip(&estimates) {
        let idx = grid.index_of(*kx).unwrap();
        let reference = analytic.cd(idx, grid.center());
        assert!(
            (IDLER_SIGN * est.mean - reference).norm() <= 4.0 * est.std_error,
            "probe {kx}: mc {} vs analytic {}",
            IDLER_SIGN * est.mean,
            reference
        );
    }
}

/// The double-slit ghost pattern traced by a detector sweep is reproduced by
/// the Monte Carlo oracle within statistical error: sampled cross-moments
/// follow the fringe oscillation of the swept cross-correlation.
#[test]
fn sweep_fringes_match_monte_carlo_pattern() {
    use ghostbeam::{DetectorMap, GhostSetup};
    let (spectrum, bs, kernel) = double_slit_bench(257);
    let grid = spectrum.grid().clone();
    let detector = DetectorMap::new(0.5, 500e-9).unwrap();
    let setup =
        GhostSetup::on_axis(spectrum.clone(), bs, kernel.clone(), detector).unwrap();

    // probes spanning two full fringes (fringe period 2π/d in offset)
    let fringe_modes = (std::f64::consts::TAU / 50e-6 / grid.spacing()).round() as usize;
    let probes: Vec<f64> =
        (0..13).map(|q| grid.kx(grid.center() + q * fringe_modes / 6)).collect();
    let estimates =
        estimate_cross_correlations(&spectrum, &bs, &kernel, &probes, 0.0, 200_000, 31).unwrap();
    let mut sign_flips = 0;
    let mut prev = 0.0f64;
    for (kx, est) in probes.iter().zip(&estimates) {
        let exact = setup.cross_correlation(*kx).unwrap();
        assert!(
            (IDLER_SIGN * est.mean - exact).norm() <= 4.0 * est.std_error,
            "probe {kx}: mc {} vs swept pattern {}",
            IDLER_SIGN * est.mean,
            exact
        );
        if prev != 0.0 && exact.re * prev < 0.0 {
            sign_flips += 1;
        }
        prev = exact.re;
    }
    // the amplitude changes sign at each |g¹| minimum: once per fringe
    assert_eq!(sign_flips, 2, "expected the fringe oscillation across the probes");
}

/// g¹ built from estimated moments approaches the closed-form value with
/// error ∝ 1/√n: the log-log slope over three decades stays within 20% of
/// −1/2.
#[test]
fn estimated_g1_converges_with_root_n() {
    let (spectrum, bs, kernel) = double_slit_bench(257);
    let analytic = analytic_moments(&bs, &spectrum, &kernel).unwrap();
    let grid = spectrum.grid();
    let m = grid.count();
    let k0 = grid.center();
    let probes: Vec<f64> = (0..m).map(|i| grid.kx(i)).collect();

    let mut points = Vec::new();
    for (exp, n_samples) in [(4, 10_000u64), (5, 100_000), (6, 1_000_000)] {
        let estimates = estimate_cross_correlations(
            &spectrum,
            &bs,
            &kernel,
            &probes,
            0.0,
            n_samples,
            1000 + exp as u64,
        )
        .unwrap();
        // moment-formed g¹ against the analytic-moment g¹, L2 over all modes
        let mut err_sqr = 0.0;
        for (i, est) in estimates.iter().enumerate() {
            let cc = analytic.cc()[i];
            let dd = analytic.dd()[k0];
            if cc == 0.0 || dd == 0.0 {
                continue;
            }
            let g1_mc = IDLER_SIGN * est.mean / (cc * dd).sqrt();
            let g1_ref = analytic.cd(i, k0) / (cc * dd).sqrt();
            err_sqr += (g1_mc - g1_ref).norm_sqr();
        }
        points.push(((n_samples as f64).log10(), err_sqr.sqrt().log10()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum::<f64>();
    assert!(
        (slope + 0.5).abs() <= 0.1,
        "error-vs-n slope {slope}, expected −0.5 ± 0.1"
    );
}
