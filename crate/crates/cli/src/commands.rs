//! Command implementations: build the optical bench from a validated config,
//! run it, and emit CSV files / validation reports atomically.

use std::fs;
use std::path::{Path, PathBuf};

use ghostbeam::diffraction::{kernel_nslit, kernel_quadrature, Aperture, NSlit, PixelMask};
use ghostbeam::oracle::run_validation;
use ghostbeam::{
    BeamSplitter, DetectorMap, DiffractionKernel, GhostSetup, ModeGrid, SourceSpectrum,
};

use crate::config::{ApertureChoice, SourceShape, ValidatedConfig};

/// Error category drives the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: the configuration is unusable.
    Config(String),
    /// Exit 3: the simulation itself failed.
    Runtime(String),
    /// Exit 1: oracle checks ran and at least one FAILed.
    ChecksFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
            CliError::ChecksFailed => write!(f, "validation checks failed"),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

struct Bench {
    spectrum: SourceSpectrum,
    splitter: BeamSplitter,
    kernel: DiffractionKernel,
    detector: DetectorMap,
}

fn build_bench(cfg: &ValidatedConfig) -> Result<Bench, CliError> {
    let grid =
        ModeGrid::new(cfg.k_max, cfg.count, cfg.optical_wavelength).map_err(runtime)?;
    let spectrum = match cfg.source {
        SourceShape::Flat { level } => SourceSpectrum::flat(&grid, level),
        SourceShape::Gaussian { peak, sigma_k } => SourceSpectrum::gaussian(&grid, peak, sigma_k),
    }
    .map_err(runtime)?;
    let splitter = BeamSplitter::new(cfg.r).map_err(runtime)?;
    let kernel = match &cfg.aperture {
        ApertureChoice::NSlit { n, a, d } => {
            let slits = NSlit::new(*n, *a, *d).map_err(runtime)?;
            let lambda_t = Aperture::NSlit(slits.clone())
                .transmissivity(cfg.plane_extent)
                .map_err(runtime)?;
            kernel_nslit(&grid, &slits, lambda_t).map_err(runtime)?
        }
        ApertureChoice::Mask { path, quad_points } => {
            let text = fs::read_to_string(path).map_err(runtime)?;
            let mask = PixelMask::from_text(&text).map_err(runtime)?;
            let aperture = Aperture::Mask(mask);
            let lambda_t = aperture.transmissivity(cfg.plane_extent).map_err(runtime)?;
            kernel_quadrature(&grid, &aperture, lambda_t, *quad_points).map_err(runtime)?
        }
    };
    let detector = DetectorMap::new(cfg.f3, cfg.optical_wavelength).map_err(runtime)?;
    Ok(Bench { spectrum, splitter, kernel, detector })
}

/// Write the finished bytes through a `.part` file so a reported failure
/// never leaves a partially written output behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut partial = path.as_os_str().to_owned();
    partial.push(".part");
    let partial = PathBuf::from(partial);
    let result = fs::write(&partial, bytes)
        .and_then(|()| fs::rename(&partial, path));
    if result.is_err() {
        let _ = fs::remove_file(&partial);
    }
    result.map_err(runtime)
}

pub fn run_pattern(
    cfg: &ValidatedConfig,
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<(), CliError> {
    let bench = build_bench(cfg)?;
    let setup = GhostSetup::on_axis(bench.spectrum, bench.splitter, bench.kernel, bench.detector)
        .map_err(runtime)?;
    let pattern =
        setup.sweep_pattern(cfg.x_min, cfg.x_max, cfg.points).map_err(runtime)?;

    let path = out.unwrap_or_else(|| PathBuf::from("pattern.csv"));
    write_atomic(&path, pattern.to_csv_string().as_bytes())?;

    if !quiet {
        println!("peak |g1| = {} at x = {} m", pattern.max_abs_g1(), pattern.peak_position());
        match pattern.zero_positions().iter().cloned().filter(|x| *x > 0.0).reduce(f64::min) {
            Some(x) => println!("first |g1| zero at x = {x} m"),
            None => println!("first |g1| zero: none inside the sweep"),
        }
        match pattern.fringe_spacing_estimate() {
            Some(s) => println!("fringe spacing estimate = {s} m"),
            None => println!("fringe spacing estimate: fewer than two fringes"),
        }
        println!("approximation quality = {}", pattern.approximation_quality);
        println!("wrote {} ({} rows)", path.display(), pattern.len());
    }
    Ok(())
}

pub fn run_intensity(
    cfg: &ValidatedConfig,
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<(), CliError> {
    let bench = build_bench(cfg)?;
    let grid = bench.spectrum.grid().clone();
    let setup = GhostSetup::on_axis(bench.spectrum, bench.splitter, bench.kernel, bench.detector)
        .map_err(runtime)?;

    let mut csv = String::from("k_x,intensity\n");
    for i in 0..grid.count() {
        let kx = grid.kx(i);
        let intensity = setup.signal_intensity(kx).map_err(runtime)?;
        csv.push_str(&format!("{kx},{intensity}\n"));
    }
    let path = out.unwrap_or_else(|| PathBuf::from("intensity.csv"));
    write_atomic(&path, csv.as_bytes())?;
    if !quiet {
        println!("wrote {} ({} rows)", path.display(), grid.count());
    }
    Ok(())
}

pub fn run_validate(
    cfg: &ValidatedConfig,
    out: Option<PathBuf>,
    seed_override: Option<u64>,
    quiet: bool,
) -> Result<(), CliError> {
    let oracle = cfg
        .oracle
        .filter(|o| o.enabled)
        .ok_or_else(|| CliError::Config("validation requires oracle (set [oracle] enabled = true)".into()))?;
    let seed = seed_override.unwrap_or(oracle.seed);

    let bench = build_bench(cfg)?;
    let mut kernel = bench.kernel;
    // fault-injection hook used by the integration tests
    if std::env::var_os("GHOSTBEAM_BREAK_KERNEL_NORM").is_some() {
        kernel = kernel.scaled_by(1.05);
    }
    if cfg.count > 2049 && !quiet {
        eprintln!(
            "note: the moment-propagation oracle is O(count³); grid.count = {} may take minutes",
            cfg.count
        );
    }
    let report = run_validation(&bench.spectrum, &bench.splitter, &kernel, oracle.n_samples, seed)
        .map_err(runtime)?;

    let path = out.unwrap_or_else(|| PathBuf::from("validation.txt"));
    write_atomic(&path, report.to_string().as_bytes())?;
    if !quiet {
        print!("{report}");
        println!("wrote {}", path.display());
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}
