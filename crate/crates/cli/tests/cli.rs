//! End-to-end tests of the `ghostbeam` binary: exit codes, strict config
//! handling, deterministic outputs, and the validation report.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "ghostbeam-cli-{}-{name}",
        std::process::id()
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn base_config(x_max: f64, oracle: &str) -> String {
    format!(
        r#"
[grid]
k_max = 1.6e6
count = 1025
optical_wavelength = 500e-9

[source]
shape = "flat"
level = 1.0

[splitter]
r = 0.6

[aperture]
type = "nslit"
n = 2
a = 10e-6
d = 50e-6
plane_extent = 1e-3

[detector]
f3 = 0.5
x_min = -{x_max}
x_max = {x_max}
points = 2049
{oracle}"#
    )
}

const ORACLE_SECTION: &str = "
[oracle]
enabled = true
seed = 11
n_samples = 20000
";

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ghostbeam"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn pattern_writes_csv_with_fringes() {
    let dir = workdir("pattern");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, "")).unwrap();
    let out = dir.join("pattern.csv");
    let result = run(
        &["pattern", config.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(result.status.success(), "{}", stderr_of(&result));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x_m,k_x,g1_re,g1_im,g1_abs,g1_approx,signal_intensity"
    );
    assert_eq!(csv.lines().count(), 2050);

    // fringe spacing from the emitted data: distance between the |g1| maxima
    // columns must reproduce λ_opt·f₃/d = 5 mm within a grid step
    let rows: Vec<(f64, f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (
                cols[0].parse().unwrap(),
                cols[1].parse().unwrap(),
                cols[4].parse().unwrap(),
            )
        })
        .collect();
    // collapse the snap-to-mode plateaus, then find local maxima
    let mut plateaus: Vec<(f64, f64)> = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].1 != rows[start].1 {
            plateaus.push((0.5 * (rows[start].0 + rows[i - 1].0), rows[start].2));
            start = i;
        }
    }
    let mut maxima = Vec::new();
    for w in plateaus.windows(3) {
        if w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1 > 0.005 {
            maxima.push(w[1].0);
        }
    }
    let spacings: Vec<f64> = maxima.windows(2).map(|w| w[1] - w[0]).collect();
    let median = {
        let mut s = spacings.clone();
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    };
    // regress position on fringe index to average out snap quantization
    let indices: Vec<f64> = maxima.iter().map(|x| ((x - maxima[0]) / median).round()).collect();
    let n = maxima.len() as f64;
    let mean_i = indices.iter().sum::<f64>() / n;
    let mean_x = maxima.iter().sum::<f64>() / n;
    let slope = indices
        .iter()
        .zip(&maxima)
        .map(|(i, x)| (i - mean_i) * (x - mean_x))
        .sum::<f64>()
        / indices.iter().map(|i| (i - mean_i) * (i - mean_i)).sum::<f64>();
    let grid_step = (2.0 * 1.6e6 / 1024.0) * 500e-9 * 0.5 / std::f64::consts::TAU;
    assert!(
        (slope - 5e-3).abs() <= grid_step,
        "fringe spacing from CSV: {slope}, expected 5e-3 ± {grid_step}"
    );

    // byte-identical rerun
    let out2 = dir.join("pattern2.csv");
    let result = run(
        &["pattern", config.to_str().unwrap(), "--out", out2.to_str().unwrap(), "--quiet"],
        &[],
    );
    assert!(result.status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn config_range_error_names_the_key() {
    let dir = workdir("range");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, "").replace("r = 0.6", "r = 1.2")).unwrap();
    let result = run(&["pattern", config.to_str().unwrap()], &[]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = stderr_of(&result);
    assert!(stderr.contains("splitter.r"), "{stderr}");
}

#[test]
fn unknown_key_suggests_the_right_one() {
    let dir = workdir("typo");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, "").replace("[aperture]", "[aperature]")).unwrap();
    let result = run(&["pattern", config.to_str().unwrap()], &[]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = stderr_of(&result);
    assert!(stderr.contains("did you mean \"aperture\""), "{stderr}");
}

#[test]
fn out_of_band_sweep_leaves_no_file() {
    let dir = workdir("band");
    let config = dir.join("run.toml");
    // x = 0.2 m maps to 5e6 rad/m, far beyond the 1.6e6 rad/m band
    fs::write(&config, base_config(0.2, "")).unwrap();
    let out = dir.join("pattern.csv");
    let result = run(
        &["pattern", config.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(result.status.code(), Some(3));
    assert!(stderr_of(&result).contains("sweep out of band"));
    assert!(!out.exists(), "failed run must not leave an output file");
    assert!(!dir.join("pattern.csv.part").exists());
}

#[test]
fn validate_passes_and_is_seed_sensitive() {
    let dir = workdir("validate");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, ORACLE_SECTION).replace("count = 1025", "count = 129"))
        .unwrap();
    let out = dir.join("report.txt");
    let result = run(
        &["validate", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"],
        &[],
    );
    assert_eq!(result.status.code(), Some(0), "{}", stderr_of(&result));
    let report = fs::read_to_string(&out).unwrap();
    assert!(report.contains("kernel_normalization"));
    assert!(report.contains("result: PASS"));

    // same seed reproduces the report byte for byte; another seed does not
    let out_same = dir.join("report_same.txt");
    run(&["validate", config.to_str().unwrap(), "--out", out_same.to_str().unwrap(), "--quiet"], &[]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out_same).unwrap());
    let out_other = dir.join("report_other.txt");
    let result = run(
        &[
            "validate",
            config.to_str().unwrap(),
            "--out",
            out_other.to_str().unwrap(),
            "--seed",
            "12345",
            "--quiet",
        ],
        &[],
    );
    assert_eq!(result.status.code(), Some(0));
    assert_ne!(fs::read(&out).unwrap(), fs::read(&out_other).unwrap());
}

#[test]
fn corrupted_kernel_normalization_fails_validation() {
    let dir = workdir("fault");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, ORACLE_SECTION).replace("count = 1025", "count = 129"))
        .unwrap();
    let out = dir.join("report.txt");
    let result = run(
        &["validate", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"],
        &[("GHOSTBEAM_BREAK_KERNEL_NORM", "1")],
    );
    assert_eq!(result.status.code(), Some(1));
    let report = fs::read_to_string(&out).unwrap();
    assert!(report.contains("kernel_normalization"));
    assert!(report.contains("FAIL"));
}

#[test]
fn validate_requires_the_oracle() {
    let dir = workdir("nooracle");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, "")).unwrap();
    let result = run(&["validate", config.to_str().unwrap()], &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("validation requires oracle"));

    let disabled = base_config(0.04, ORACLE_SECTION).replace("enabled = true", "enabled = false");
    fs::write(&config, disabled).unwrap();
    let result = run(&["validate", config.to_str().unwrap()], &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("validation requires oracle"));
}

#[test]
fn intensity_profile_is_flat_for_flat_source() {
    let dir = workdir("intensity");
    let config = dir.join("run.toml");
    fs::write(&config, base_config(0.04, "")).unwrap();
    let out = dir.join("intensity.csv");
    let result = run(
        &["intensity", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"],
        &[],
    );
    assert!(result.status.success(), "{}", stderr_of(&result));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k_x,intensity");
    let values: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(values.len(), 1025);
    assert!(values.iter().all(|v| *v == values[0]), "flat source must give a flat profile");
}

#[test]
fn mask_aperture_round_trip() {
    let dir = workdir("mask");
    let mask = dir.join("slits.txt");
    let mut mask_text = String::from("pitch=5e-6\n");
    let mut row = ['0'; 13];
    row[0] = '1';
    row[1] = '1';
    row[10] = '1';
    row[11] = '1';
    mask_text.push_str(&row.iter().collect::<String>());
    mask_text.push('\n');
    fs::write(&mask, mask_text).unwrap();

    let config = dir.join("run.toml");
    let text = base_config(0.04, "")
        .replace("type = \"nslit\"\nn = 2\na = 10e-6\nd = 50e-6", "type = \"mask\"\nmask_path = \"slits.txt\"");
    fs::write(&config, text).unwrap();
    let out = dir.join("pattern.csv");
    let result = run(
        &["pattern", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"],
        &[],
    );
    assert!(result.status.success(), "{}", stderr_of(&result));
    // mask has no closed form: the approximation column is NaN
    let csv = fs::read_to_string(&out).unwrap();
    let first = csv.lines().nth(1).unwrap();
    assert_eq!(first.split(',').nth(5).unwrap(), "NaN");
}
