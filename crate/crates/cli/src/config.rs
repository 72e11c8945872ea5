//! Strict TOML configuration: unknown keys are errors (with a did-you-mean
//! hint), and validation reports every violation at once with its key path.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Documented defaults; everything else is required.
pub const DEFAULT_GRID_COUNT: usize = 4097;
pub const DEFAULT_DETECTOR_POINTS: usize = 1025;
pub const DEFAULT_ORACLE_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_QUAD_POINTS: usize = 2048;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub source: SourceConfig,
    pub splitter: SplitterConfig,
    pub aperture: ApertureConfig,
    pub detector: DetectorConfig,
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub k_max: Option<f64>,
    pub count: Option<usize>,
    pub optical_wavelength: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub shape: Option<String>,
    pub level: Option<f64>,
    pub peak: Option<f64>,
    pub sigma_k: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitterConfig {
    pub r: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureConfig {
    #[serde(rename = "type")]
    pub kind: Option<String>,
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub d: Option<f64>,
    pub mask_path: Option<String>,
    pub quad_points: Option<usize>,
    pub plane_extent: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub f3: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub enabled: Option<bool>,
    pub seed: Option<u64>,
    pub n_samples: Option<u64>,
}

const ROOT_KEYS: &[&str] = &["grid", "source", "splitter", "aperture", "detector", "oracle"];
const GRID_KEYS: &[&str] = &["k_max", "count", "optical_wavelength"];
const SOURCE_KEYS: &[&str] = &["shape", "level", "peak", "sigma_k"];
const SPLITTER_KEYS: &[&str] = &["r"];
const APERTURE_KEYS: &[&str] =
    &["type", "n", "a", "d", "mask_path", "quad_points", "plane_extent"];
const DETECTOR_KEYS: &[&str] = &["f3", "x_min", "x_max", "points"];
const ORACLE_KEYS: &[&str] = &["enabled", "seed", "n_samples"];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn suggest(unknown: &str, candidates: &'static [&'static str]) -> Option<&'static str> {
    candidates
        .iter()
        .map(|c| (*c, levenshtein(unknown, c)))
        .filter(|(_, d)| *d <= 3)
        .min_by_key(|(_, d)| *d)
        .map(|(c, _)| c)
}

fn check_keys(
    prefix: &str,
    table: &toml::Table,
    known: &'static [&'static str],
    errors: &mut Vec<String>,
) {
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            let mut message = format!("{prefix}{key}: unknown key");
            if let Some(hint) = suggest(key, known) {
                let _ = write!(message, ", did you mean \"{hint}\"?");
            }
            errors.push(message);
        }
    }
}

/// Parse and fully validate a configuration document. All structural and
/// range violations are collected and reported together.
pub fn parse_config(text: &str, config_dir: &Path) -> Result<ValidatedConfig, String> {
    let table: toml::Table =
        text.parse().map_err(|e| format!("configuration parse error: {e}"))?;

    let mut errors = Vec::new();
    check_keys("", &table, ROOT_KEYS, &mut errors);
    let sections: [(&str, &'static [&'static str]); 6] = [
        ("grid", GRID_KEYS),
        ("source", SOURCE_KEYS),
        ("splitter", SPLITTER_KEYS),
        ("aperture", APERTURE_KEYS),
        ("detector", DETECTOR_KEYS),
        ("oracle", ORACLE_KEYS),
    ];
    for (name, keys) in sections {
        if let Some(toml::Value::Table(section)) = table.get(name) {
            check_keys(&format!("{name}."), section, keys, &mut errors);
        }
    }
    if !errors.is_empty() {
        return Err(render_errors(&errors));
    }

    let raw: RunConfig =
        toml::from_str(text).map_err(|e| format!("configuration parse error: {e}"))?;
    validate(raw, config_dir).map_err(|errors| render_errors(&errors))
}

fn render_errors(errors: &[String]) -> String {
    let mut out = String::from("configuration errors:");
    for e in errors {
        let _ = write!(out, "\n  - {e}");
    }
    out
}

/// Config after validation, with defaults applied and enums resolved.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub k_max: f64,
    pub count: usize,
    pub optical_wavelength: f64,
    pub source: SourceShape,
    pub r: f64,
    pub aperture: ApertureChoice,
    pub plane_extent: f64,
    pub f3: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub oracle: Option<OracleSettings>,
}

#[derive(Debug, Clone)]
pub enum SourceShape {
    Flat { level: f64 },
    Gaussian { peak: f64, sigma_k: f64 },
}

#[derive(Debug, Clone)]
pub enum ApertureChoice {
    NSlit { n: usize, a: f64, d: f64 },
    Mask { path: PathBuf, quad_points: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    pub enabled: bool,
    pub seed: u64,
    pub n_samples: u64,
}

fn require<T: Copy>(
    value: Option<T>,
    path: &str,
    errors: &mut Vec<String>,
) -> Option<T> {
    if value.is_none() {
        errors.push(format!("{path}: required key is missing"));
    }
    value
}

fn require_positive(value: Option<f64>, path: &str, errors: &mut Vec<String>) -> Option<f64> {
    match require(value, path, errors) {
        Some(v) if v > 0.0 && v.is_finite() => Some(v),
        Some(v) => {
            errors.push(format!("{path}: must be strictly positive and finite, got {v}"));
            None
        }
        None => None,
    }
}

fn forbid<T>(value: &Option<T>, path: &str, reason: &str, errors: &mut Vec<String>) {
    if value.is_some() {
        errors.push(format!("{path}: {reason}"));
    }
}

fn validate(raw: RunConfig, config_dir: &Path) -> Result<ValidatedConfig, Vec<String>> {
    let mut errors = Vec::new();

    let k_max = require_positive(raw.grid.k_max, "grid.k_max", &mut errors);
    let optical_wavelength =
        require_positive(raw.grid.optical_wavelength, "grid.optical_wavelength", &mut errors);
    if let (Some(k), Some(w)) = (k_max, optical_wavelength) {
        let limit = std::f64::consts::TAU / w;
        if k >= limit {
            errors.push(format!(
                "grid.k_max: must stay below 2π/optical_wavelength = {limit:.6e}, got {k:.6e}"
            ));
        }
    }
    let count = raw.grid.count.unwrap_or(DEFAULT_GRID_COUNT);
    if count < 3 || count.is_multiple_of(2) {
        errors.push(format!("grid.count: must be odd and at least 3, got {count}"));
    }

    let source = match raw.source.shape.as_deref() {
        Some("flat") => {
            forbid(&raw.source.peak, "source.peak", "only used when shape = \"gaussian\"", &mut errors);
            forbid(&raw.source.sigma_k, "source.sigma_k", "only used when shape = \"gaussian\"", &mut errors);
            require_positive(raw.source.level, "source.level", &mut errors)
                .map(|level| SourceShape::Flat { level })
        }
        Some("gaussian") => {
            forbid(&raw.source.level, "source.level", "only used when shape = \"flat\"", &mut errors);
            let peak = require_positive(raw.source.peak, "source.peak", &mut errors);
            let sigma_k = require_positive(raw.source.sigma_k, "source.sigma_k", &mut errors);
            match (peak, sigma_k) {
                (Some(peak), Some(sigma_k)) => Some(SourceShape::Gaussian { peak, sigma_k }),
                _ => None,
            }
        }
        Some(other) => {
            errors.push(format!(
                "source.shape: expected \"flat\" or \"gaussian\", got \"{other}\""
            ));
            None
        }
        None => {
            errors.push("source.shape: required key is missing".into());
            None
        }
    };

    let r = match require(raw.splitter.r, "splitter.r", &mut errors) {
        Some(r) if r > 0.0 && r < 1.0 => Some(r),
        Some(r) => {
            errors.push(format!(
                "splitter.r: must lie strictly between 0 and 1, got {r}"
            ));
            None
        }
        None => None,
    };

    let plane_extent =
        require_positive(raw.aperture.plane_extent, "aperture.plane_extent", &mut errors);
    let aperture = match raw.aperture.kind.as_deref() {
        Some("nslit") => {
            forbid(&raw.aperture.mask_path, "aperture.mask_path", "only used when type = \"mask\"", &mut errors);
            forbid(&raw.aperture.quad_points, "aperture.quad_points", "only used when type = \"mask\"", &mut errors);
            let n = require(raw.aperture.n, "aperture.n", &mut errors);
            let a = require_positive(raw.aperture.a, "aperture.a", &mut errors);
            if let Some(n) = n {
                if n < 1 {
                    errors.push(format!("aperture.n: must be at least 1, got {n}"));
                }
                if n == 1 {
                    forbid(&raw.aperture.d, "aperture.d", "unused for a single slit", &mut errors);
                } else if let Some(a) = a {
                    match raw.aperture.d {
                        Some(d) if d > a => {}
                        Some(d) => errors.push(format!(
                            "aperture.d: slits must not overlap, need d > a = {a:e}, got {d:e}"
                        )),
                        None => errors
                            .push("aperture.d: required key is missing for n > 1".into()),
                    }
                }
                if let (Some(a), Some(plane)) = (a, plane_extent) {
                    if n as f64 * a > plane {
                        errors.push(format!(
                            "aperture.plane_extent: open extent n·a = {:e} exceeds plane {plane:e}",
                            n as f64 * a
                        ));
                    }
                }
            }
            match (n, a) {
                (Some(n), Some(a)) => Some(ApertureChoice::NSlit {
                    n,
                    a,
                    d: raw.aperture.d.unwrap_or(0.0),
                }),
                _ => None,
            }
        }
        Some("mask") => {
            forbid(&raw.aperture.n, "aperture.n", "only used when type = \"nslit\"", &mut errors);
            forbid(&raw.aperture.a, "aperture.a", "only used when type = \"nslit\"", &mut errors);
            forbid(&raw.aperture.d, "aperture.d", "only used when type = \"nslit\"", &mut errors);
            let quad_points = raw.aperture.quad_points.unwrap_or(DEFAULT_QUAD_POINTS);
            if quad_points < 64 {
                errors.push(format!(
                    "aperture.quad_points: need at least 64 per open interval, got {quad_points}"
                ));
            }
            match raw.aperture.mask_path {
                Some(ref p) => {
                    let path = config_dir.join(p);
                    if !path.is_file() {
                        errors.push(format!(
                            "aperture.mask_path: file {} does not exist",
                            path.display()
                        ));
                        None
                    } else {
                        Some(ApertureChoice::Mask { path, quad_points })
                    }
                }
                None => {
                    errors.push("aperture.mask_path: required key is missing".into());
                    None
                }
            }
        }
        Some(other) => {
            errors.push(format!(
                "aperture.type: expected \"nslit\" or \"mask\", got \"{other}\""
            ));
            None
        }
        None => {
            errors.push("aperture.type: required key is missing".into());
            None
        }
    };

    let f3 = require_positive(raw.detector.f3, "detector.f3", &mut errors);
    let x_min = require(raw.detector.x_min, "detector.x_min", &mut errors);
    let x_max = require(raw.detector.x_max, "detector.x_max", &mut errors);
    if let (Some(lo), Some(hi)) = (x_min, x_max) {
        if lo >= hi || lo.is_nan() || hi.is_nan() {
            errors.push(format!(
                "detector.x_min/x_max: need x_min < x_max, got [{lo}, {hi}]"
            ));
        }
    }
    let points = raw.detector.points.unwrap_or(DEFAULT_DETECTOR_POINTS);
    if points < 2 {
        errors.push(format!("detector.points: a sweep needs at least 2 points, got {points}"));
    }

    let oracle = raw.oracle.map(|o| {
        let mut settings = OracleSettings {
            enabled: false,
            seed: 0,
            n_samples: o.n_samples.unwrap_or(DEFAULT_ORACLE_SAMPLES),
        };
        match o.enabled {
            Some(enabled) => settings.enabled = enabled,
            None => errors.push("oracle.enabled: required key is missing".into()),
        }
        match o.seed {
            Some(seed) => settings.seed = seed,
            None => errors.push("oracle.seed: required key is missing".into()),
        }
        if settings.n_samples < 10_000 {
            errors.push(format!(
                "oracle.n_samples: need at least 10000 samples, got {}",
                settings.n_samples
            ));
        }
        settings
    });

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(ValidatedConfig {
        k_max: k_max.unwrap(),
        count,
        optical_wavelength: optical_wavelength.unwrap(),
        source: source.unwrap(),
        r: r.unwrap(),
        aperture: aperture.unwrap(),
        plane_extent: plane_extent.unwrap(),
        f3: f3.unwrap(),
        x_min: x_min.unwrap(),
        x_max: x_max.unwrap(),
        points,
        oracle,
    })
}
