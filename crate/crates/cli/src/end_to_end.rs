//! Whole-command runs through the same entry point as the binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{error_line, exit_code, run, Cli};

/// What the binary would do: exit status, stdout and stderr.
struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Output {
    fn success(&self) -> bool {
        self.code == 0
    }
}

fn cissa(args: &[&str]) -> Output {
    let cli = match Cli::try_parse_from(std::iter::once("cissa").chain(args.iter().copied())) {
        Ok(cli) => cli,
        Err(e) => return Output { code: e.exit_code(), stdout: String::new(), stderr: e.to_string() },
    };
    let mut buf = Vec::new();
    let result = run(cli, &mut buf);
    let stdout = String::from_utf8(buf).unwrap();
    match result {
        Ok(()) => Output { code: 0, stdout, stderr: String::new() },
        Err(e) => Output { code: exit_code(&e).into(), stdout, stderr: error_line(&e) },
    }
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("synthetic_monthly.csv")
}

fn write_values(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let body: String = std::iter::once("value".to_string()).chain(values.iter().map(|v| format!("{v:.17e}"))).collect::<Vec<_>>().join("\n");
    fs::write(&path, body + "\n").unwrap();
    path
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn component_files_add_back_to_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for variant in ["cissa", "basic", "toeplitz"] {
        let o = cissa(&["decompose", "--input", s(&bundled()), "--column", "index", "--window", "48", "--variant", variant, "--out", s(&out)]);
        assert!(o.success(), "{variant}: {}", o.stderr);
        assert!(o.stdout.contains("Irregular"), "{}", o.stdout);
        let original: Vec<f64> = rows(&out.join("decomposition.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
        let mut total = vec![0.0; original.len()];
        for name in ["trend", "cycle", "seasonal", "irregular"] {
            let comp = rows(&out.join(format!("component_{name}.csv")));
            for (acc, r) in total.iter_mut().zip(&comp) {
                *acc += r.last().unwrap().parse::<f64>().unwrap();
            }
        }
        for (a, b) in total.iter().zip(&original) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{variant}: {a} vs {b}");
        }
        fs::remove_dir_all(&out).unwrap();
    }
}

#[test]
fn window_too_large_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = cissa(&["decompose", "--input", s(&bundled()), "--column", "index", "--window", "150", "--out", s(&out)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("error[WindowOutOfRange]"));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "no staging leftovers");
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = cissa(&["spectrum", "--input", s(&missing), "--window", "12", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.starts_with("error[FileNotFound]"));
}

#[test]
fn non_numeric_cell_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "value\n1\n2\n3\nx\n5\n6\n7\n8\n9\n10\n").unwrap();
    let o = cissa(&["spectrum", "--input", s(&path), "--window", "4", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.code, 3, "{}", o.stderr);
}

#[test]
fn zero_replications_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = cissa(&["simulate", "--reps", "0", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("error[InvalidParams]"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = cissa(&["simulate", "--reps", "12", "--seed", "7", "--variant", "cissa", "--out", s(&out)]);
        assert!(o.success(), "{}", o.stderr);
        fs::read_to_string(out.join("quantiles_linear_cissa.csv")).unwrap()
    };
    let first = run("a");
    assert_eq!(first, run("b"));
    assert!(first.starts_with("component,statistic,q5,q25,q50,q75,q95"));
}

fn spectrum(dir: &Path, values: &[f64], window: usize) -> Vec<(f64, f64)> {
    let input = write_values(dir, "in.csv", values);
    let out = dir.join("spec");
    let o = cissa(&["spectrum", "--input", s(&input), "--window", &window.to_string(), "--out", s(&out)]);
    assert!(o.success(), "{}", o.stderr);
    rows(&out.join("spectrum.csv")).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect()
}

#[test]
fn spectrum_peaks_at_the_cosine_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (1..=240).map(|t| 3.0 * (2.0 * PI * t as f64 / 12.0).cos()).collect();
    let spec = spectrum(dir.path(), &x, 48);
    let peak = spec.iter().copied().fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    assert!((peak.0 - 1.0 / 12.0).abs() < 1e-12, "{peak:?}");
}

#[test]
fn white_noise_spectrum_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let spec = spectrum(dir.path(), &x, 48);
    let max = spec.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let min = spec.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    assert!(min > 0.0 && max / min < 10.0, "{max} / {min}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_config");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!("# run settings\ninput = {}\ncolumn = index\nwindow = 200\nout = {}\n", s(&bundled()), s(&out)),
    )
    .unwrap();
    // window from the file is invalid, the flag fixes it
    let bad = cissa(&["decompose", "--config", s(&cfg)]);
    assert_eq!(bad.code, 2);
    let ok = cissa(&["decompose", "--config", s(&cfg), "--window", "24"]);
    assert!(ok.success(), "{}", ok.stderr);
    assert!(out.join("shares.csv").exists());
}

#[test]
fn custom_bands_name_the_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = cissa(&[
        "decompose", "--input", s(&bundled()), "--column", "1", "--window", "48", "--out", s(&out),
        "--bands", "slow=0:1/20;fast=1/20:0.5;residual=rest",
    ]);
    assert!(o.success(), "{}", o.stderr);
    let names: Vec<String> = rows(&out.join("shares.csv")).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(names, ["slow", "fast", "rest"]);
}
